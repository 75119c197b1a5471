//! Flat tiles over the arrow category, the finite basis of coordination
//! squares, and the synthesis engine that assembles any existing pullback
//! of term-sorted arrows out of basic tiles, recording a proof term.
//!
//! A tile is a bordered square. All four borders are stored as arrows in
//! the plain (substitution) direction:
//!
//! ```text
//!               initial
//!       o0  <------------  o1
//!        ^                  ^
//!  trigger                  | effect
//!        |                  |
//!       o2  <------------  o3
//!                final
//! ```
//!
//! so the border conditions are `trigger.cod = initial.cod`,
//! `effect.cod = initial.dom`, `final.dom = effect.dom` and
//! `final.cod = trigger.dom`. Drawing the square with every arrow reversed
//! recovers the usual reading where computation flows downwards.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::syntax::Signature;
use crate::theory::{
    compose, decompose_slices, discharger, duplicator, identity, invert_perm, op_arrow,
    perm_arrow, symmetry, tensor, Arrow, Component, Iface, PlTerm, Slice, SliceBody,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TileError {
    #[error("border mismatch in {op}: {left} vs {right}")]
    Border { op: &'static str, left: String, right: String },
    #[error("unknown basic tile `{0}`")]
    UnknownTile(String),
    #[error("arrow contains a discharger")]
    Discharger,
    #[error("proof term contains a non-basic leaf `{0}`")]
    NonBasicLeaf(String),
}

/// A bordered square; see the module docs for orientation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tile {
    pub initial: Arrow,
    pub trigger: Arrow,
    pub effect: Arrow,
    pub final_: Arrow,
}

impl Tile {
    pub fn new(initial: Arrow, trigger: Arrow, effect: Arrow, final_: Arrow) -> Tile {
        let t = Tile { initial, trigger, effect, final_ };
        debug_assert!(t.well_bordered(), "ill-bordered tile: {t}");
        t
    }

    pub fn well_bordered(&self) -> bool {
        self.trigger.cod == self.initial.cod
            && self.effect.cod == self.initial.dom
            && self.final_.dom == self.effect.dom
            && self.final_.cod == self.trigger.dom
    }

    /// `effect;initial = final;trigger` — the square commutes as arrows.
    pub fn commutes(&self) -> bool {
        match (compose(&self.effect, &self.initial), compose(&self.final_, &self.trigger)) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        }
    }

    /// Transpose the borders (initial with trigger, effect with final).
    pub fn transpose(&self) -> Tile {
        Tile::new(
            self.trigger.clone(),
            self.initial.clone(),
            self.final_.clone(),
            self.effect.clone(),
        )
    }
}

impl fmt::Display for Tile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} | {} / {} | {}]", self.initial, self.trigger, self.effect, self.final_)
    }
}

/// The composition tree that entailed a tile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofTerm {
    /// A named basic tile of the ambient tile system.
    Basic(String),
    /// Horizontal identity of an observation.
    HId(Arrow),
    /// Vertical identity of a configuration.
    VId(Arrow),
    HComp(Box<ProofTerm>, Box<ProofTerm>),
    VComp(Box<ProofTerm>, Box<ProofTerm>),
    Par(Box<ProofTerm>, Box<ProofTerm>),
}

impl ProofTerm {
    pub fn depth(&self) -> usize {
        match self {
            ProofTerm::Basic(_) | ProofTerm::HId(_) | ProofTerm::VId(_) => 1,
            ProofTerm::HComp(a, b) | ProofTerm::VComp(a, b) | ProofTerm::Par(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// Names of basic tiles used, with multiplicity.
    pub fn leaves(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.leaves_into(&mut out);
        out
    }

    fn leaves_into(&self, out: &mut Vec<String>) {
        match self {
            ProofTerm::Basic(n) => out.push(n.clone()),
            ProofTerm::HId(_) | ProofTerm::VId(_) => {}
            ProofTerm::HComp(a, b) | ProofTerm::VComp(a, b) | ProofTerm::Par(a, b) => {
                a.leaves_into(out);
                b.leaves_into(out);
            }
        }
    }

    /// Indented one-node-per-line rendering for trace output.
    pub fn render(&self) -> String {
        let mut s = String::new();
        self.render_into(0, &mut s);
        s
    }

    fn render_into(&self, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        match self {
            ProofTerm::Basic(n) => out.push_str(&format!("{pad}{n}\n")),
            ProofTerm::HId(a) => out.push_str(&format!("{pad}1_({a})\n")),
            ProofTerm::VId(a) => out.push_str(&format!("{pad}1^({a})\n")),
            ProofTerm::HComp(a, b) => {
                out.push_str(&format!("{pad}hcomp\n"));
                a.render_into(depth + 1, out);
                b.render_into(depth + 1, out);
            }
            ProofTerm::VComp(a, b) => {
                out.push_str(&format!("{pad}vcomp\n"));
                a.render_into(depth + 1, out);
                b.render_into(depth + 1, out);
            }
            ProofTerm::Par(a, b) => {
                out.push_str(&format!("{pad}par\n"));
                a.render_into(depth + 1, out);
                b.render_into(depth + 1, out);
            }
        }
    }
}

/// A name-indexed set of basic tiles.
#[derive(Debug, Clone, Default)]
pub struct TileSystem {
    pub tiles: BTreeMap<String, Tile>,
}

impl TileSystem {
    pub fn insert(&mut self, name: &str, tile: Tile) {
        self.tiles.insert(name.to_string(), tile);
    }

    pub fn get(&self, name: &str) -> Option<&Tile> {
        self.tiles.get(name)
    }

    pub fn extend(&mut self, other: &TileSystem) {
        for (k, v) in &other.tiles {
            self.tiles.insert(k.clone(), v.clone());
        }
    }
}

// ---------------------------------------------------------------------------
// Tile composition

/// Horizontal composition: `a`'s effect must be `b`'s trigger; `a` is the
/// outer tile (its initial configuration is applied last).
pub fn hcomp(a: &Tile, b: &Tile) -> Result<Tile, TileError> {
    if a.effect != b.trigger {
        return Err(TileError::Border {
            op: "hcomp",
            left: a.effect.to_string(),
            right: b.trigger.to_string(),
        });
    }
    Ok(Tile::new(
        compose(&b.initial, &a.initial).map_err(border("hcomp"))?,
        a.trigger.clone(),
        b.effect.clone(),
        compose(&b.final_, &a.final_).map_err(border("hcomp"))?,
    ))
}

/// Vertical composition: `a`'s final configuration must be `b`'s initial.
pub fn vcomp(a: &Tile, b: &Tile) -> Result<Tile, TileError> {
    if a.final_ != b.initial {
        return Err(TileError::Border {
            op: "vcomp",
            left: a.final_.to_string(),
            right: b.initial.to_string(),
        });
    }
    Ok(Tile::new(
        a.initial.clone(),
        compose(&b.trigger, &a.trigger).map_err(border("vcomp"))?,
        compose(&b.effect, &a.effect).map_err(border("vcomp"))?,
        b.final_.clone(),
    ))
}

/// Parallel composition: componentwise tensor of the borders.
pub fn par(a: &Tile, b: &Tile) -> Tile {
    Tile::new(
        tensor(&a.initial, &b.initial),
        tensor(&a.trigger, &b.trigger),
        tensor(&a.effect, &b.effect),
        tensor(&a.final_, &b.final_),
    )
}

/// Horizontal identity of an observation `u`.
pub fn hid(u: &Arrow) -> Tile {
    Tile::new(identity(&u.cod), u.clone(), u.clone(), identity(&u.dom))
}

/// Vertical identity of a configuration `t`.
pub fn vid(t: &Arrow) -> Tile {
    Tile::new(t.clone(), identity(&t.cod), identity(&t.dom), t.clone())
}

fn border(op: &'static str) -> impl Fn(crate::theory::ArrowError) -> TileError {
    move |e| TileError::Border { op, left: e.to_string(), right: String::new() }
}

// ---------------------------------------------------------------------------
// The basis of coordination squares

pub fn name_r(f: &str) -> String {
    format!("R({f})")
}
pub fn name_d(f: &str) -> String {
    format!("D({f})")
}
pub fn name_dh(f: &str) -> String {
    format!("Dh({f})")
}
pub const R_NABLA: &str = "R(nabla)";
pub const R_GAMMA: &str = "R(gamma)";
pub const D_NABLA: &str = "D(nabla)";

fn t(n: usize) -> Iface {
    Iface::terms(n)
}

/// `R_f : [f | f / id | id]` — the operator matched against itself.
pub fn r_op(f: &str, n: usize) -> Tile {
    let fa = op_arrow(f, n);
    Tile::new(fa.clone(), fa, identity(&t(n)), identity(&t(n)))
}

/// `D_f : [f (x) id | nabla / nabla_n;(id_n (x) f) | f]` — the operator
/// meets a shared placeholder, first output.
pub fn d_op(f: &str, n: usize) -> Tile {
    let fa = op_arrow(f, n);
    let initial = tensor(&fa, &identity(&t(1)));
    let trigger = duplicator(&t(1));
    let effect = compose(&duplicator(&t(n)), &tensor(&identity(&t(n)), &fa)).unwrap();
    Tile::new(initial, trigger, effect, fa)
}

/// `Dh_f` — the transpose of `D_f`.
pub fn dh_op(f: &str, n: usize) -> Tile {
    d_op(f, n).transpose()
}

pub fn r_nabla() -> Tile {
    let nab = duplicator(&t(1));
    Tile::new(nab.clone(), nab, identity(&t(1)), identity(&t(1)))
}

pub fn r_gamma() -> Tile {
    let g = symmetry(&t(1), &t(1));
    Tile::new(g.clone(), g, identity(&t(2)), identity(&t(2)))
}

pub fn d_nabla() -> Tile {
    let nab = duplicator(&t(1));
    let id1 = identity(&t(1));
    Tile::new(tensor(&nab, &id1), tensor(&id1, &nab), nab.clone(), nab.clone())
}

/// The pullback basis for a signature: three tiles per function symbol plus
/// the three signature-independent squares.
pub fn basic_tiles(sig: &Signature) -> TileSystem {
    let mut sys = TileSystem::default();
    sys.insert(R_NABLA, r_nabla());
    sys.insert(R_GAMMA, r_gamma());
    sys.insert(D_NABLA, d_nabla());
    for (f, &n) in &sig.functions {
        sys.insert(&name_r(f), r_op(f, n));
        sys.insert(&name_d(f), d_op(f, n));
        sys.insert(&name_dh(f), dh_op(f, n));
    }
    sys
}

/// Evaluate a proof term back to the tile it entails.
pub fn eval_proof(p: &ProofTerm, sys: &TileSystem) -> Result<Tile, TileError> {
    match p {
        ProofTerm::Basic(name) => {
            if let Some(t) = sys.get(name) {
                return Ok(t.clone());
            }
            match name.as_str() {
                _ if name == R_NABLA => Ok(r_nabla()),
                _ if name == R_GAMMA => Ok(r_gamma()),
                _ if name == D_NABLA => Ok(d_nabla()),
                _ => Err(TileError::UnknownTile(name.clone())),
            }
        }
        ProofTerm::HId(u) => Ok(hid(u)),
        ProofTerm::VId(t) => Ok(vid(t)),
        ProofTerm::HComp(a, b) => hcomp(&eval_proof(a, sys)?, &eval_proof(b, sys)?),
        ProofTerm::VComp(a, b) => vcomp(&eval_proof(a, sys)?, &eval_proof(b, sys)?),
        ProofTerm::Par(a, b) => Ok(par(&eval_proof(a, sys)?, &eval_proof(b, sys)?)),
    }
}

// ---------------------------------------------------------------------------
// Cells: tiles carrying their own proof

#[derive(Debug, Clone)]
struct Cell {
    tile: Tile,
    proof: ProofTerm,
}

impl Cell {
    fn basic(name: &str, tile: Tile) -> Cell {
        Cell { tile, proof: ProofTerm::Basic(name.to_string()) }
    }

    fn vid(t: &Arrow) -> Cell {
        Cell { tile: vid(t), proof: ProofTerm::VId(t.clone()) }
    }

    fn hid(u: &Arrow) -> Cell {
        Cell { tile: hid(u), proof: ProofTerm::HId(u.clone()) }
    }

    fn hcomp(a: Cell, b: Cell) -> Cell {
        let tile = hcomp(&a.tile, &b.tile)
            .unwrap_or_else(|e| panic!("hcomp in synthesis: {e}\n  a={}\n  b={}", a.tile, b.tile));
        Cell { tile, proof: ProofTerm::HComp(Box::new(a.proof), Box::new(b.proof)) }
    }

    fn vcomp(a: Cell, b: Cell) -> Cell {
        let tile = vcomp(&a.tile, &b.tile)
            .unwrap_or_else(|e| panic!("vcomp in synthesis: {e}\n  a={}\n  b={}", a.tile, b.tile));
        Cell { tile, proof: ProofTerm::VComp(Box::new(a.proof), Box::new(b.proof)) }
    }

    fn par(a: Cell, b: Cell) -> Cell {
        Cell {
            tile: par(&a.tile, &b.tile),
            proof: ProofTerm::Par(Box::new(a.proof), Box::new(b.proof)),
        }
    }

    /// Pad with identity interfaces left and right.
    fn pad(left: usize, mid: Cell, right: usize) -> Cell {
        let mut cell = mid;
        if left > 0 {
            cell = Cell::par(Cell::vid(&identity(&t(left))), cell);
        }
        if right > 0 {
            cell = Cell::par(cell, Cell::vid(&identity(&t(right))));
        }
        cell
    }
}

/// Lift a discharger-free term-sorted arrow to the square matching it
/// against itself, built slice by slice from the `R`-tiles.
pub fn lift_r(arrow: &Arrow) -> Result<(Tile, ProofTerm), TileError> {
    let cell = lift_r_cell(arrow)?;
    Ok((cell.tile, cell.proof))
}

fn lift_r_cell(arrow: &Arrow) -> Result<Cell, TileError> {
    if !arrow.all_t() {
        return Err(TileError::Border {
            op: "lift_r",
            left: arrow.to_string(),
            right: String::new(),
        });
    }
    let slices = decompose_slices(arrow).map_err(|_| TileError::Discharger)?;
    if slices.iter().any(|s| s.body == SliceBody::Drop) {
        return Err(TileError::Discharger);
    }
    let mut cell = Cell::vid(&identity(&arrow.dom));
    let mut built = identity(&arrow.dom);
    for slice in slices {
        let r = match &slice.body {
            SliceBody::Op(f, n) => Cell::basic(&name_r(f), r_op(f, *n)),
            SliceBody::Dup => Cell::basic(R_NABLA, r_nabla()),
            SliceBody::Swap => Cell::basic(R_GAMMA, r_gamma()),
            SliceBody::Drop => unreachable!(),
        };
        let padded = Cell::pad(slice.left, r, slice.right);
        // diagonal step: extend [built | built / id | id] by one outer slice
        let step = Cell::hcomp(padded, Cell::vid(&built));
        built = step.tile.initial.clone();
        cell = Cell::vcomp(step, cell);
    }
    debug_assert_eq!(&cell.tile.initial, arrow);
    debug_assert_eq!(&cell.tile.trigger, arrow);
    Ok(cell)
}

/// Transpose a tile generated by the basis, transposing its proof leaf-wise:
/// `D(f)` and `Dh(f)` swap, the duplicator coordination square maps to its
/// composed transpose, identities swap kind, and horizontal composition
/// exchanges with vertical.
pub fn dual(tile: &Tile, proof: &ProofTerm) -> Result<(Tile, ProofTerm), TileError> {
    Ok((tile.transpose(), dual_proof(proof)?))
}

fn dual_proof(p: &ProofTerm) -> Result<ProofTerm, TileError> {
    Ok(match p {
        ProofTerm::Basic(name) => {
            if name == D_NABLA {
                dhat_nabla_cell().proof
            } else if name.starts_with("R(") {
                ProofTerm::Basic(name.clone())
            } else if let Some(f) = name.strip_prefix("D(").and_then(|s| s.strip_suffix(')')) {
                ProofTerm::Basic(name_dh(f))
            } else if let Some(f) = name.strip_prefix("Dh(").and_then(|s| s.strip_suffix(')')) {
                ProofTerm::Basic(name_d(f))
            } else {
                return Err(TileError::NonBasicLeaf(name.clone()));
            }
        }
        ProofTerm::HId(u) => ProofTerm::VId(u.clone()),
        ProofTerm::VId(t) => ProofTerm::HId(t.clone()),
        ProofTerm::HComp(a, b) => {
            ProofTerm::VComp(Box::new(dual_proof(a)?), Box::new(dual_proof(b)?))
        }
        ProofTerm::VComp(a, b) => {
            ProofTerm::HComp(Box::new(dual_proof(a)?), Box::new(dual_proof(b)?))
        }
        ProofTerm::Par(a, b) => ProofTerm::Par(Box::new(dual_proof(a)?), Box::new(dual_proof(b)?)),
    })
}

// ---------------------------------------------------------------------------
// Derived coordination cells

/// Pullback of a permutation north against an arbitrary west arrow:
/// `[rho | v / v;rho^-1 | id]`.
fn perm_north(rho: &Arrow, v: &Arrow) -> Cell {
    let inv = invert_perm(rho).expect("perm_north needs a permutation");
    let moved = compose(v, &inv).unwrap();
    let lifted = lift_r_cell(rho).expect("permutations are discharger-free");
    Cell::vcomp(lifted, Cell::hid(&moved))
}

/// Pullback of an arbitrary north against a permutation west:
/// `[theta | rho / id | theta;rho^-1]`.
fn perm_west(theta: &Arrow, rho: &Arrow) -> Cell {
    let inv = invert_perm(rho).expect("perm_west needs a permutation");
    let moved = compose(theta, &inv).unwrap();
    let lifted = lift_r_cell(rho).expect("permutations are discharger-free");
    Cell::hcomp(lifted, Cell::vid(&moved))
}

/// The transpose of the duplicator coordination square, pasted from the
/// basis; this is the one basic transpose that needs a genuine composition.
fn dhat_nabla_cell() -> Cell {
    let id1 = identity(&t(1));
    let nab = duplicator(&t(1));
    let gam = symmetry(&t(1), &t(1));
    let rev3 = perm_arrow(&[3, 2, 1]);
    let gam_id = tensor(&gam, &id1);
    let id_gam = tensor(&id1, &gam);
    let nab_id = tensor(&nab, &id1);
    let id_nab = tensor(&id1, &nab);
    // top row: a symmetry square flanked by identity cells
    let a1 = {
        let lifted = lift_r_cell(&rev3).unwrap();
        Cell::vcomp(lifted, Cell::hid(&identity(&t(3))))
    };
    let a2 = Cell::vid(&gam_id);
    let a3 = Cell::vid(&compose(&gam, &nab_id).unwrap());
    let row_a = Cell::hcomp(a1, Cell::hcomp(a2, a3));
    // left column of horizontal identities
    let a4 = Cell::hid(&id_gam);
    let a7 = Cell::hid(&compose(&nab_id, &perm_arrow(&[3, 1, 2])).unwrap());
    let left = Cell::vcomp(a4, a7);
    // centre: the duplicator square, flushed right by symmetry squares
    let a5 = Cell::basic(D_NABLA, d_nabla());
    let a6 = Cell::basic(R_GAMMA, r_gamma());
    let a8 = Cell::hid(&nab);
    let right = Cell::vcomp(a6, a8);
    let cr = Cell::hcomp(a5, right);
    let a9 = Cell::basic(R_GAMMA, r_gamma());
    let a10 = Cell::vid(&nab);
    let a11 = Cell::hid(&id1);
    let bottom = Cell::hcomp(a9, Cell::hcomp(a10, a11));
    let cs = Cell::vcomp(cr, bottom);
    let mid = Cell::hcomp(left, cs);
    let total = Cell::vcomp(row_a, mid);
    debug_assert_eq!(total.tile.initial, id_nab);
    debug_assert_eq!(total.tile.trigger, nab_id);
    debug_assert_eq!(total.tile.effect, nab);
    debug_assert_eq!(total.tile.final_, nab);
    total
}

/// `Dh'_f`: the duplicator meets the operator on its other output; composed
/// by conjugating `Dh_f` with symmetry squares.
fn dhat_prime_cell(f: &str, n: usize) -> Cell {
    let nab1 = duplicator(&t(1));
    let gam11 = symmetry(&t(1), &t(1));
    let x1 = perm_west(&nab1, &gam11);
    let x2 = Cell::basic(&name_dh(f), dh_op(f, n));
    let gam_1n = symmetry(&t(1), &t(n));
    let x2_final = x2.tile.final_.clone();
    let x3 = perm_west(&x2_final, &gam_1n);
    let cell = Cell::vcomp(x1, Cell::vcomp(x2, x3));
    debug_assert_eq!(cell.tile.initial, nab1);
    debug_assert_eq!(cell.tile.trigger, tensor(&identity(&t(1)), &op_arrow(f, n)));
    cell
}

// ---------------------------------------------------------------------------
// Pullback synthesis

/// Build a pullback square over the cospan `(north, west)` as a composition
/// of basic tiles and identities, or report that none exists.
///
/// The west arrow is peeled into elementary slices, each coordinated against
/// the current north residue; the effect and final borders of the result are
/// the two pullback projections.
pub fn synthesize_pullback(north: &Arrow, west: &Arrow) -> Option<(Tile, ProofTerm)> {
    assert_eq!(north.cod, west.cod, "synthesize_pullback needs a cospan");
    assert!(north.all_t() && west.all_t(), "pullback synthesis is term-sorted");
    let mut budget = Budget { left: 2_000_000 };
    let cell = synth(north, west, &mut budget)?;
    debug_assert!(cell.tile.commutes());
    debug_assert_eq!(&cell.tile.initial, north);
    debug_assert_eq!(&cell.tile.trigger, west);
    Some((cell.tile, cell.proof))
}

struct Budget {
    left: u32,
}

impl Budget {
    fn spend(&mut self) {
        self.left = self
            .left
            .checked_sub(1)
            .expect("pullback synthesis exceeded its step budget (cycle in case analysis?)");
    }
}

fn synth(north: &Arrow, west: &Arrow, budget: &mut Budget) -> Option<Cell> {
    budget.spend();
    if west.is_identity() {
        return Some(Cell::vid(north));
    }
    if north.is_identity() {
        return Some(Cell::hid(west));
    }
    if west.as_permutation().is_some() {
        return Some(perm_west(north, west));
    }
    if north.as_permutation().is_some() {
        return Some(perm_north(north, west));
    }
    // Peel the outermost slice of the west arrow.
    let slices = decompose_slices(west).ok()?;
    let (rest, last) = slices.split_at(slices.len() - 1);
    let slice = &last[0];
    let rest_arrow = crate::theory::compose_slices(&west.dom, rest).unwrap();
    let a = slice_row(north, slice, budget)?;
    debug_assert_eq!(&a.tile.initial, north);
    debug_assert_eq!(a.tile.trigger, slice.arrow());
    let a_final = a.tile.final_.clone();
    let c = synth(&a_final, &rest_arrow, budget)?;
    Some(Cell::vcomp(a, c))
}

/// Coordinate a general north arrow against one elementary west slice.
fn slice_row(north: &Arrow, s: &Slice, budget: &mut Budget) -> Option<Cell> {
    budget.spend();
    match &s.body {
        SliceBody::Swap => Some(perm_west(north, &s.arrow())),
        SliceBody::Drop => Some(bang_west(north, s.right)),
        SliceBody::Op(f, n) => op_case(north, s.at(), &f.clone(), *n, s),
        SliceBody::Dup => dup_case(north, s.at(), s, budget),
    }
}

/// West discharges one placeholder: pair the square up from the two
/// identities of the discharger, then re-seat the fresh placeholder.
fn bang_west(north: &Arrow, c: usize) -> Cell {
    let bang1 = discharger(&t(1));
    let x = Cell::par(Cell::vid(north), Cell::hid(&bang1));
    if c == 0 {
        return x;
    }
    let z = north.cod.len();
    let rho = tensor(&identity(&t(z - c)), &symmetry(&t(1), &t(c)));
    let fin = x.tile.final_.clone();
    let y = perm_west(&fin, &rho);
    Cell::vcomp(x, y)
}

/// West applies an operator `f` at codomain position `q`.
fn op_case(north: &Arrow, q: usize, f: &str, n: usize, s: &Slice) -> Option<Cell> {
    match north.term_at(q).clone() {
        PlTerm::App(g, args) => {
            if g != *f || args.len() != n {
                return None; // operator clash: no pullback exists
            }
            // Matching operator: peel it off the north side.
            let peeled = splice_component(north, q, args);
            let padded = Cell::pad(s.left, Cell::basic(&name_r(f), r_op(f, n)), s.right);
            Some(Cell::hcomp(padded, Cell::vid(&peeled)))
        }
        PlTerm::Hole(j) => {
            if north.hole_uses()[j - 1] == 1 {
                Some(linear_bind(north, q, j, f, n, s))
            } else {
                // Isolate this use behind an elementary copier, bind the
                // fresh copy, then coordinate the copier with the operator.
                let u = north.dom.len();
                let theta2 = retarget_component(north, q, u + 1);
                let a = linear_bind(&theta2, q, u + 1, f, n, s);
                debug_assert_eq!(a.tile.effect, tensor(&identity(&t(u)), &op_arrow(f, n)));
                let b = copier_vs_op(u, j, f, n);
                Some(Cell::hcomp(a, b))
            }
        }
    }
}

/// West duplicates one placeholder into codomain positions `q`, `q+1`.
fn dup_case(north: &Arrow, q: usize, s: &Slice, budget: &mut Budget) -> Option<Cell> {
    budget.spend();
    let z = north.cod.len();
    let t1 = north.term_at(q).clone();
    let t2 = north.term_at(q + 1).clone();
    match (t1, t2) {
        (PlTerm::App(f, args), PlTerm::App(g, args2)) => {
            if f != g || args.len() != args2.len() {
                return None;
            }
            // Peel the first operator; the coordination square re-shares it.
            let peeled = splice_component(north, q, args);
            let padded =
                Cell::pad(q - 1, Cell::basic(&name_d(&f), d_op(&f, args2.len())), z - q - 1);
            let eff = padded.tile.effect.clone();
            let b = synth(&peeled, &eff, budget)?;
            Some(Cell::hcomp(padded, b))
        }
        (PlTerm::Hole(j), PlTerm::App(f, args)) => {
            // The shared placeholder would have to absorb f(args).
            if args.iter().any(|a| a.contains_hole(j)) {
                return None; // occurs failure
            }
            let peeled = splice_component(north, q + 1, args.clone());
            let base = dhat_prime_cell(&f, args.len());
            let (tile, proof) = dual(&base.tile, &base.proof).unwrap();
            let padded = Cell::pad(q - 1, Cell { tile, proof }, z - q - 1);
            let eff = padded.tile.effect.clone();
            let b = synth(&peeled, &eff, budget)?;
            Some(Cell::hcomp(padded, b))
        }
        (PlTerm::App(f, args), PlTerm::Hole(j)) => {
            if args.iter().any(|a| a.contains_hole(j)) {
                return None; // occurs failure
            }
            let peeled = splice_component(north, q, args.clone());
            let padded =
                Cell::pad(q - 1, Cell::basic(&name_d(&f), d_op(&f, args.len())), z - q - 1);
            let eff = padded.tile.effect.clone();
            let b = synth(&peeled, &eff, budget)?;
            Some(Cell::hcomp(padded, b))
        }
        (PlTerm::Hole(j1), PlTerm::Hole(j2)) => {
            let uses = north.hole_uses();
            if j1 == j2 {
                if uses[j1 - 1] == 2 {
                    // Exactly the two shared occurrences: the duplicator
                    // matched against itself.
                    let reduced = collapse_pair(north, q);
                    let padded = Cell::pad(q - 1, Cell::basic(R_NABLA, r_nabla()), z - q - 1);
                    Some(Cell::hcomp(padded, Cell::vid(&reduced)))
                } else {
                    let u = north.dom.len();
                    let theta2 = retarget_component(north, q + 1, u + 1);
                    let a = dup_case(&theta2, q, s, budget)?;
                    let eff = a.tile.effect.clone();
                    let b = copier_vs_vartuple(u, j1, &eff)?;
                    Some(Cell::hcomp(a, b))
                }
            } else if uses[j1 - 1] == 1 && uses[j2 - 1] == 1 {
                Some(dup_linear(north, q, j1, j2, s))
            } else if uses[j1 - 1] > 1 {
                let u = north.dom.len();
                let theta2 = retarget_component(north, q, u + 1);
                let a = dup_case(&theta2, q, s, budget)?;
                let eff = a.tile.effect.clone();
                let b = copier_vs_vartuple(u, j1, &eff)?;
                Some(Cell::hcomp(a, b))
            } else {
                let u = north.dom.len();
                let theta2 = retarget_component(north, q + 1, u + 1);
                let a = dup_case(&theta2, q, s, budget)?;
                let eff = a.tile.effect.clone();
                let b = copier_vs_vartuple(u, j2, &eff)?;
                Some(Cell::hcomp(a, b))
            }
        }
    }
}

/// West binds the linear placeholder `x_j` (at codomain position `q`) to an
/// `f`-application; the core of the square is the horizontal identity of
/// `f`, conjugated into position.
fn linear_bind(north: &Arrow, q: usize, j: usize, f: &str, n: usize, s: &Slice) -> Cell {
    let z = north.cod.len();
    let u = north.dom.len();
    let s_arrow = s.arrow();
    // move codomain position q to the end
    let rho_cod = if q == z {
        None
    } else {
        Some(tensor(&identity(&t(q - 1)), &symmetry(&t(1), &t(z - q))))
    };
    let theta_m = match &rho_cod {
        Some(rho) => compose(north, rho).unwrap(),
        None => north.clone(),
    };
    debug_assert_eq!(theta_m.comps[z - 1], north.comps[q - 1]);
    // move domain placeholder j to the end
    let rho_dom = if j == u {
        None
    } else {
        Some(tensor(&identity(&t(j - 1)), &symmetry(&t(1), &t(u - j))))
    };
    let theta_del = delete_component_and_var(&theta_m, z, j);
    debug_assert_eq!(
        &match &rho_dom {
            Some(rho) => compose(rho, &tensor(&theta_del, &identity(&t(1)))).unwrap(),
            None => tensor(&theta_del, &identity(&t(1))),
        },
        &theta_m,
        "linear_bind: north factorization"
    );
    let core = Cell::par(Cell::vid(&theta_del), Cell::hid(&op_arrow(f, n)));
    let a2a = match &rho_dom {
        Some(rho) => {
            let eff = core.tile.effect.clone();
            Cell::hcomp(core, perm_north(rho, &eff))
        }
        None => core,
    };
    debug_assert_eq!(a2a.tile.initial, theta_m);
    // factor the relocated west slice through id (x) f
    let w1 = match &rho_cod {
        Some(rho) => compose(&s_arrow, rho).unwrap(),
        None => s_arrow.clone(),
    };
    let core_trigger = tensor(&identity(&t(z - 1)), &op_arrow(f, n));
    let a2 = if w1 == core_trigger {
        a2a
    } else {
        let rho_v = factor_perm(&w1, &core_trigger);
        let fin = a2a.tile.final_.clone();
        Cell::vcomp(a2a, perm_west(&fin, &rho_v))
    };
    debug_assert_eq!(a2.tile.trigger, w1);
    match rho_cod {
        Some(rho) => Cell::hcomp(perm_north(&invert_perm(&rho).unwrap(), &s_arrow), a2),
        None => a2,
    }
}

/// West duplicates into two distinct linear placeholders: the core is the
/// horizontal identity of the duplicator, conjugated into position.
fn dup_linear(north: &Arrow, q: usize, j1: usize, j2: usize, s: &Slice) -> Cell {
    let z = north.cod.len();
    let u = north.dom.len();
    let s_arrow = s.arrow();
    // move codomain positions q, q+1 to the end (order preserved)
    let rho_cod = if q + 1 == z {
        None
    } else {
        Some(tensor(&identity(&t(q - 1)), &symmetry(&t(2), &t(z - q - 1))))
    };
    let theta_m = match &rho_cod {
        Some(rho) => compose(north, rho).unwrap(),
        None => north.clone(),
    };
    debug_assert_eq!(theta_m.comps[z - 2], north.comps[q - 1]);
    debug_assert_eq!(theta_m.comps[z - 1], north.comps[q]);
    // move domain placeholders j1, j2 to the last two slots, in that order
    let mut images: Vec<usize> = (1..=u).filter(|&i| i != j1 && i != j2).collect();
    images.push(j1);
    images.push(j2);
    let rho_dom_arrow = perm_arrow(&images);
    let rho_dom = if rho_dom_arrow.is_identity() { None } else { Some(rho_dom_arrow) };
    let theta_del = {
        let step1 = delete_component_and_var(&theta_m, z, j2);
        let j1s = if j1 > j2 { j1 - 1 } else { j1 };
        delete_component_and_var(&step1, z - 1, j1s)
    };
    debug_assert_eq!(
        &match &rho_dom {
            Some(rho) => compose(rho, &tensor(&theta_del, &identity(&t(2)))).unwrap(),
            None => tensor(&theta_del, &identity(&t(2))),
        },
        &theta_m,
        "dup_linear: north factorization"
    );
    let core = Cell::par(Cell::vid(&theta_del), Cell::hid(&duplicator(&t(1))));
    let a2a = match &rho_dom {
        Some(rho) => {
            let eff = core.tile.effect.clone();
            Cell::hcomp(core, perm_north(rho, &eff))
        }
        None => core,
    };
    debug_assert_eq!(a2a.tile.initial, theta_m);
    let w1 = match &rho_cod {
        Some(rho) => compose(&s_arrow, rho).unwrap(),
        None => s_arrow.clone(),
    };
    let core_trigger = tensor(&identity(&t(z - 2)), &duplicator(&t(1)));
    let a2 = if w1 == core_trigger {
        a2a
    } else {
        let rho_v = factor_perm(&w1, &core_trigger);
        let fin = a2a.tile.final_.clone();
        Cell::vcomp(a2a, perm_west(&fin, &rho_v))
    };
    debug_assert_eq!(a2.tile.trigger, w1);
    match rho_cod {
        Some(rho) => Cell::hcomp(perm_north(&invert_perm(&rho).unwrap(), &s_arrow), a2),
        None => a2,
    }
}

/// Pullback of the elementary copier `<x1..xU, xj>` against `id_U (x) f`.
fn copier_vs_op(u: usize, j: usize, f: &str, n: usize) -> Cell {
    let delta = copier(u, j);
    let w = tensor(&identity(&t(u)), &op_arrow(f, n));
    // delta = rho_a ; (nabla (x) id_{U-1}) ; rho_b
    let rho_a = front_perm(u, j);
    let mut rb_images = vec![0usize; u + 1];
    for (i, img) in rb_images.iter_mut().enumerate() {
        let i = i + 1;
        *img = if i < j {
            2 + i
        } else if i == j {
            1
        } else if i <= u {
            i + 1
        } else {
            2
        };
    }
    let rho_b = perm_arrow(&rb_images);
    let mid = compose(&rho_a, &tensor(&duplicator(&t(1)), &identity(&t(u - 1)))).unwrap();
    debug_assert_eq!(compose(&mid, &rho_b).unwrap(), delta);
    let a1 = perm_north(&rho_b, &w);
    let w2 = a1.tile.effect.clone();
    let a2a = Cell::pad(0, dhat_prime_cell(f, n), u - 1);
    let a2 = if w2 == a2a.tile.trigger {
        a2a
    } else {
        let rho_c = factor_perm(&w2, &a2a.tile.trigger);
        let fin = a2a.tile.final_.clone();
        Cell::vcomp(a2a, perm_west(&fin, &rho_c))
    };
    debug_assert_eq!(a2.tile.trigger, w2);
    let a3 = if rho_a.is_identity() {
        a2
    } else {
        let eff = a2.tile.effect.clone();
        let cont = perm_north(&rho_a, &eff);
        Cell::hcomp(a2, cont)
    };
    let total = Cell::hcomp(a1, a3);
    debug_assert_eq!(total.tile.initial, delta);
    debug_assert_eq!(total.tile.trigger, w);
    total
}

/// Pullback of the elementary copier `<x1..xU, xj>` against a variable
/// tuple `w : U -> U+1` that duplicates exactly one placeholder.
fn copier_vs_vartuple(u: usize, j: usize, w: &Arrow) -> Option<Cell> {
    let delta = copier(u, j);
    debug_assert_eq!(w.cod.len(), u + 1);
    if w.as_permutation().is_some() {
        return Some(perm_west(&delta, w));
    }
    // find west's duplicated placeholder positions
    let (p1, p2) = {
        let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
        let mut pair = None;
        for (i, c) in w.comps.iter().enumerate() {
            let Component::T(PlTerm::Hole(v)) = c else {
                panic!("copier_vs_vartuple expects a variable tuple, got {w}")
            };
            if let Some(&first) = seen.get(v) {
                pair = Some((first, i + 1));
            } else {
                seen.insert(*v, i + 1);
            }
        }
        pair?
    };
    let n_tie = (j, u + 1);
    if (p1, p2) == n_tie {
        // Same tied pair: west factors as a permutation through the copier.
        let mut images = vec![0usize; u];
        for (i, img) in images.iter_mut().enumerate() {
            let Component::T(PlTerm::Hole(v)) = &w.comps[i] else { unreachable!() };
            *img = *v;
        }
        let pi = perm_arrow(&images);
        debug_assert_eq!(compose(&pi, &delta).unwrap(), *w);
        let lifted = lift_r_cell(&delta).unwrap();
        return Some(Cell::vcomp(lifted, Cell::hid(&pi)));
    }
    // Bring the tied positions to the front and coordinate there.
    let shared: Vec<usize> =
        [n_tie.0, n_tie.1].iter().copied().filter(|p| *p == p1 || *p == p2).collect();
    let tied: Vec<usize> = match shared.len() {
        1 => {
            let sh = shared[0];
            let n_only = if n_tie.0 == sh { n_tie.1 } else { n_tie.0 };
            let w_only = if p1 == sh { p2 } else { p1 };
            vec![n_only, sh, w_only]
        }
        _ => vec![n_tie.0, n_tie.1, p1, p2],
    };
    let mut order = tied.clone();
    for i in 1..=u + 1 {
        if !order.contains(&i) {
            order.push(i);
        }
    }
    let rho = perm_arrow(&order);
    let mid_n = compose(&delta, &rho).unwrap();
    let w1 = compose(w, &rho).unwrap();
    let a1 = perm_north(&invert_perm(&rho).unwrap(), w);
    debug_assert_eq!(a1.tile.effect, w1);
    let core = if tied.len() == 3 {
        Cell::pad(0, Cell::basic(D_NABLA, d_nabla()), u - 2)
    } else {
        // disjoint ties: the two duplicators commute through identities
        let dup = duplicator(&t(1));
        Cell::pad(0, Cell::par(Cell::vid(&dup), Cell::hid(&dup)), u - 3)
    };
    let core_north = tensor(&duplicator(&t(1)), &identity(&t(u - 1)));
    debug_assert_eq!(core.tile.initial, core_north);
    let rho_d = factor_perm(&mid_n, &core_north);
    let rho_w = factor_perm(&w1, &core.tile.trigger);
    let a2 = if rho_w.is_identity() {
        core
    } else {
        let fin = core.tile.final_.clone();
        Cell::vcomp(core, perm_west(&fin, &rho_w))
    };
    debug_assert_eq!(a2.tile.trigger, w1);
    let a3 = if rho_d.is_identity() {
        a2
    } else {
        let eff = a2.tile.effect.clone();
        Cell::hcomp(a2, perm_north(&rho_d, &eff))
    };
    debug_assert_eq!(a3.tile.initial, mid_n);
    let total = Cell::hcomp(a1, a3);
    debug_assert_eq!(total.tile.initial, delta);
    debug_assert_eq!(&total.tile.trigger, w);
    Some(total)
}

// ---------------------------------------------------------------------------
// Arrow surgery helpers

/// `<x1..xU, xj> : U -> U+1`.
fn copier(u: usize, j: usize) -> Arrow {
    let mut comps: Vec<Component> = (1..=u).map(|i| Component::T(PlTerm::Hole(i))).collect();
    comps.push(Component::T(PlTerm::Hole(j)));
    Arrow { dom: t(u), cod: t(u + 1), comps }
}

/// Permutation reading position `j` first, the rest in order.
fn front_perm(u: usize, j: usize) -> Arrow {
    let mut images = vec![j];
    images.extend((1..=u).filter(|&i| i != j));
    perm_arrow(&images)
}

/// Replace codomain component `q` by the given subterms, splicing the
/// codomain open.
fn splice_component(a: &Arrow, q: usize, parts: Vec<PlTerm>) -> Arrow {
    let mut comps = a.comps[..q - 1].to_vec();
    comps.extend(parts.into_iter().map(Component::T));
    comps.extend_from_slice(&a.comps[q..]);
    let cod = t(comps.len());
    Arrow { dom: a.dom.clone(), cod, comps }
}

/// Replace codomain component `q` (a bare placeholder) by a fresh
/// placeholder appended to the domain.
fn retarget_component(a: &Arrow, q: usize, fresh: usize) -> Arrow {
    debug_assert_eq!(fresh, a.dom.len() + 1);
    let mut comps = a.comps.clone();
    comps[q - 1] = Component::T(PlTerm::Hole(fresh));
    Arrow { dom: t(a.dom.len() + 1), cod: a.cod.clone(), comps }
}

/// Collapse the equal components at `q`, `q+1` into one.
fn collapse_pair(a: &Arrow, q: usize) -> Arrow {
    let mut comps = a.comps.clone();
    comps.remove(q);
    Arrow { dom: a.dom.clone(), cod: t(comps.len()), comps }
}

/// Drop codomain component `q` and domain placeholder `j` (which must occur
/// only there), reindexing the remaining placeholders.
fn delete_component_and_var(a: &Arrow, q: usize, j: usize) -> Arrow {
    let mut comps = a.comps.clone();
    comps.remove(q - 1);
    let comps = comps
        .into_iter()
        .map(|c| match c {
            Component::T(tm) => Component::T(remap(&tm, j)),
            Component::P(_) => unreachable!(),
        })
        .collect();
    Arrow { dom: t(a.dom.len() - 1), cod: t(a.cod.len() - 1), comps }
}

fn remap(tm: &PlTerm, j: usize) -> PlTerm {
    match tm {
        PlTerm::Hole(i) => {
            debug_assert_ne!(*i, j, "deleted placeholder still in use");
            PlTerm::Hole(if *i > j { *i - 1 } else { *i })
        }
        PlTerm::App(op, args) => {
            PlTerm::App(op.clone(), args.iter().map(|x| remap(x, j)).collect())
        }
    }
}

/// Factor `w = rho ; core` for a permutation `rho`, reading `rho` off the
/// components of `w` against the pattern `core`.
fn factor_perm(w: &Arrow, core: &Arrow) -> Arrow {
    assert_eq!(w.cod, core.cod, "factor_perm: codomain mismatch");
    assert_eq!(w.dom.len(), core.dom.len(), "factor_perm: domain mismatch");
    let mut images = vec![0usize; w.dom.len()];
    for (cw, cc) in w.comps.iter().zip(core.comps.iter()) {
        let (Component::T(tw), Component::T(tc)) = (cw, cc) else { unreachable!() };
        read_factor(tw, tc, &mut images);
    }
    debug_assert!(images.iter().all(|&i| i != 0), "factor_perm: pattern does not cover domain");
    let rho = perm_arrow(&images);
    debug_assert_eq!(&compose(&rho, core).unwrap(), w, "factor_perm: not a factorization");
    rho
}

fn read_factor(tw: &PlTerm, tc: &PlTerm, images: &mut [usize]) {
    match (tw, tc) {
        (PlTerm::Hole(v), PlTerm::Hole(slot)) => {
            if images[*slot - 1] == 0 {
                images[*slot - 1] = *v;
            } else {
                debug_assert_eq!(images[*slot - 1], *v, "factor_perm: inconsistent reads");
            }
        }
        (PlTerm::App(f, aw), PlTerm::App(g, ac)) => {
            debug_assert_eq!(f, g);
            for (x, y) in aw.iter().zip(ac.iter()) {
                read_factor(x, y, images);
            }
        }
        _ => panic!("factor_perm: component shapes differ ({tw} vs {tc})"),
    }
}

// ---------------------------------------------------------------------------
// Bounded sequential decomposition

/// Search for a seam splitting an entailed tile whose initial configuration
/// factors as `inner;outer`: tiles `A` (initial `outer`) and `B` (initial
/// `inner`) with `hcomp(A, B) = tile`. The search is goal-directed and
/// bounded; absence is a bounded failure, not a disproof.
pub fn sequential_decompose(
    tile: &Tile,
    inner: &Arrow,
    outer: &Arrow,
    sys: &TileSystem,
    bound: usize,
) -> Option<(Tile, Tile)> {
    let composed = compose(inner, outer).ok()?;
    if composed != tile.initial {
        return None;
    }
    let mut outer_candidates: Vec<Tile> = Vec::new();
    if outer.is_identity() {
        outer_candidates.push(hid(&tile.trigger));
    }
    outer_candidates.push(vid(outer));
    for t0 in sys.tiles.values() {
        if t0.initial == *outer {
            outer_candidates.push(t0.clone());
        }
    }
    if bound > 1 {
        let base = outer_candidates.clone();
        for a in &base {
            for t0 in sys.tiles.values() {
                if t0.initial == a.final_ {
                    if let Ok(v) = vcomp(a, t0) {
                        outer_candidates.push(v);
                    }
                }
            }
        }
    }
    for a in outer_candidates {
        if a.trigger != tile.trigger {
            continue;
        }
        // B needs initial = inner, trigger = a.effect, effect = tile.effect.
        let mut inner_candidates: Vec<Tile> = Vec::new();
        if inner.is_identity() {
            inner_candidates.push(hid(&a.effect));
        }
        if a.effect.is_identity() {
            inner_candidates.push(vid(inner));
        }
        if inner.all_t() && !inner.uses_discharger() {
            // a lift column [inner | w;inner / w | id] for w solving
            // a.effect = w;inner
            if let Some(w) = factor_through(&a.effect, inner) {
                if let Ok((lifted, _)) = lift_r(inner) {
                    if let Ok(col) = vcomp(&lifted, &hid(&w)) {
                        inner_candidates.push(col);
                    }
                }
            }
        }
        if inner.all_t() && a.effect.all_t() && inner.cod == a.effect.cod {
            if let Some((b_tile, _)) = synthesize_pullback(inner, &a.effect) {
                inner_candidates.push(b_tile);
            }
        }
        for t0 in sys.tiles.values() {
            if t0.initial == *inner && t0.trigger == a.effect {
                inner_candidates.push(t0.clone());
            }
        }
        for b in inner_candidates {
            if b.trigger != a.effect {
                continue;
            }
            if let Ok(h) = hcomp(&a, &b) {
                if h == *tile {
                    return Some((a, b));
                }
            }
        }
    }
    None
}

/// Solve `target = w ; through` for `w` by matching `through`'s components
/// (patterns over its domain placeholders) against `target`'s.
pub fn factor_through(target: &Arrow, through: &Arrow) -> Option<Arrow> {
    if target.cod != through.cod {
        return None;
    }
    let mut assign: Vec<Option<PlTerm>> = vec![None; through.dom.len()];
    for (tc, pc) in target.comps.iter().zip(through.comps.iter()) {
        let (Component::T(tt), Component::T(pt)) = (tc, pc) else { return None };
        if !match_into(pt, tt, &mut assign) {
            return None;
        }
    }
    let comps: Option<Vec<Component>> = assign.into_iter().map(|o| o.map(Component::T)).collect();
    Some(Arrow { dom: target.dom.clone(), cod: through.dom.clone(), comps: comps? })
}

fn match_into(pat: &PlTerm, tgt: &PlTerm, assign: &mut [Option<PlTerm>]) -> bool {
    match pat {
        PlTerm::Hole(i) => match &assign[*i - 1] {
            Some(t0) => t0 == tgt,
            None => {
                assign[*i - 1] = Some(tgt.clone());
                true
            }
        },
        PlTerm::App(f, args) => match tgt {
            PlTerm::App(g, targs) if f == g && args.len() == targs.len() => {
                args.iter().zip(targs.iter()).all(|(a, b)| match_into(a, b, assign))
            }
            _ => false,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;
    use crate::unify::{pullback_oracle, verify_universal, PullbackResult};

    fn sig_abf() -> Signature {
        parse_program("p(f(X1),X2) :- q(X1), r(X1,X2).\nr(a,a).\nq(b).").unwrap().signature
    }

    #[test]
    fn basis_counts() {
        let sys = basic_tiles(&sig_abf());
        assert_eq!(sys.tiles.len(), 12); // 3 per symbol in {a, b, f} plus 3
        let empty = basic_tiles(&Signature::default());
        let names: Vec<_> = empty.tiles.keys().cloned().collect();
        assert_eq!(names, vec![D_NABLA.to_string(), R_GAMMA.to_string(), R_NABLA.to_string()]);
    }

    #[test]
    fn basis_tiles_commute() {
        for tile in basic_tiles(&sig_abf()).tiles.values() {
            assert!(tile.well_bordered());
            assert!(tile.commutes());
        }
    }

    #[test]
    fn identity_tile_laws() {
        let cell = d_op("f", 1);
        let right = hid(&cell.effect);
        assert_eq!(hcomp(&cell, &right).unwrap(), cell);
        let below = vid(&cell.final_);
        assert_eq!(vcomp(&cell, &below).unwrap(), cell);
        // horizontal and vertical identities of an object coincide
        assert_eq!(hid(&identity(&t(1))), vid(&identity(&t(1))));
    }

    #[test]
    fn hcomp_border_mismatch() {
        let a = r_op("f", 1);
        let b = r_op("g", 2);
        assert!(hcomp(&a, &b).is_err());
    }

    #[test]
    fn bang_pullback_by_parallel_identities() {
        let bang1 = discharger(&t(1));
        let cell = par(&hid(&bang1), &vid(&bang1));
        assert_eq!(cell.initial, bang1);
        assert_eq!(cell.trigger, bang1);
        assert_eq!(cell.effect, tensor(&bang1, &identity(&t(1))));
        assert_eq!(cell.final_, tensor(&identity(&t(1)), &bang1));
        assert!(cell.commutes());
    }

    #[test]
    fn lift_r_examples() {
        let sys = basic_tiles(&sig_abf());
        let f = op_arrow("f", 1);
        let (tile, proof) = lift_r(&f).unwrap();
        assert_eq!(tile.initial, f);
        assert_eq!(tile.trigger, f);
        assert!(tile.effect.is_identity());
        assert_eq!(eval_proof(&proof, &sys).unwrap(), tile);

        let shared = compose(&duplicator(&t(1)), &tensor(&identity(&t(1)), &f)).unwrap();
        let (tile, proof) = lift_r(&shared).unwrap();
        assert_eq!(tile.initial, shared);
        assert_eq!(tile.trigger, shared);
        assert_eq!(eval_proof(&proof, &sys).unwrap(), tile);

        let gam = symmetry(&t(1), &t(1));
        let (tile, _) = lift_r(&gam).unwrap();
        assert_eq!(tile, r_gamma());

        assert_eq!(lift_r(&discharger(&t(1))), Err(TileError::Discharger));
    }

    #[test]
    fn dual_examples() {
        let d = d_op("f", 2);
        let (dt, dp) = dual(&d, &ProofTerm::Basic(name_d("f"))).unwrap();
        assert_eq!(dt, dh_op("f", 2));
        assert_eq!(dp, ProofTerm::Basic(name_dh("f")));
        // transposition is involutive on borders
        let (ddt, _) = dual(&dt, &dp).unwrap();
        assert_eq!(ddt, d);
    }

    #[test]
    fn dual_of_duplicator_square_is_composed() {
        let (tile, proof) = dual(&d_nabla(), &ProofTerm::Basic(D_NABLA.to_string())).unwrap();
        let sys = basic_tiles(&Signature::default());
        assert_eq!(eval_proof(&proof, &sys).unwrap(), tile);
        let nab = duplicator(&t(1));
        let id1 = identity(&t(1));
        assert_eq!(tile.initial, tensor(&id1, &nab));
        assert_eq!(tile.trigger, tensor(&nab, &id1));
        assert_eq!(tile.effect, nab);
        assert_eq!(tile.final_, nab);
    }

    #[test]
    fn dhat_prime_has_the_right_border() {
        for n in 0..3 {
            let mut sig = Signature::default();
            sig.functions.insert("f".into(), n);
            let sys = basic_tiles(&sig);
            let cell = dhat_prime_cell("f", n);
            let f = op_arrow("f", n);
            assert_eq!(cell.tile.initial, duplicator(&t(1)));
            assert_eq!(cell.tile.trigger, tensor(&identity(&t(1)), &f));
            assert_eq!(cell.tile.effect, f);
            assert!(cell.tile.commutes());
            assert_eq!(eval_proof(&cell.proof, &sys).unwrap(), cell.tile);
        }
    }

    fn system_for(arrows: &[&Arrow]) -> TileSystem {
        let mut m = BTreeMap::new();
        for a in arrows {
            collect_ops(a, &mut m);
        }
        let sig = Signature { functions: m, predicates: BTreeMap::new() };
        basic_tiles(&sig)
    }

    fn check_against_oracle(north: &Arrow, west: &Arrow) {
        let synth = synthesize_pullback(north, west);
        let oracle = pullback_oracle(north, west);
        match (&synth, &oracle) {
            (None, None) => {}
            (Some((tile, proof)), Some(pb)) => {
                assert!(tile.commutes(), "synthesized tile does not commute: {tile}");
                assert!(
                    projections_equal_up_to_apex(
                        &tile.effect,
                        &tile.final_,
                        &pb.proj_left,
                        &pb.proj_right
                    ),
                    "projection mismatch for north={north} west={west}:\n tile={tile}\n oracle=({}, {})",
                    pb.proj_left,
                    pb.proj_right
                );
                let sys = system_for(&[north, west]);
                assert_eq!(
                    &eval_proof(proof, &sys).unwrap(),
                    tile,
                    "proof does not evaluate back to the tile"
                );
                let as_result = PullbackResult {
                    apex: tile.effect.dom.clone(),
                    proj_left: tile.effect.clone(),
                    proj_right: tile.final_.clone(),
                };
                assert!(verify_universal(&as_result, north, west, 2));
            }
            _ => panic!(
                "oracle disagreement for north={north}, west={west}: synthesis={}, oracle={}",
                synth.is_some(),
                oracle.is_some()
            ),
        }
    }

    fn collect_ops(a: &Arrow, out: &mut BTreeMap<String, usize>) {
        fn walk(t: &PlTerm, out: &mut BTreeMap<String, usize>) {
            if let PlTerm::App(f, args) = t {
                out.insert(f.clone(), args.len());
                args.iter().for_each(|a| walk(a, out));
            }
        }
        for c in &a.comps {
            if let Component::T(t) = c {
                walk(t, out);
            }
        }
    }

    /// Compare two candidate projection pairs up to an invertible renaming
    /// of the shared apex.
    pub(crate) fn projections_equal_up_to_apex(
        e1: &Arrow,
        f1: &Arrow,
        e2: &Arrow,
        f2: &Arrow,
    ) -> bool {
        if e1.dom != e2.dom || f1.dom != f2.dom || e1.dom != f1.dom {
            return false;
        }
        let joined1 = Arrow {
            dom: e1.dom.clone(),
            cod: e1.cod.concat(&f1.cod),
            comps: e1.comps.iter().chain(f1.comps.iter()).cloned().collect(),
        };
        let joined2 = Arrow {
            dom: e2.dom.clone(),
            cod: e2.cod.concat(&f2.cod),
            comps: e2.comps.iter().chain(f2.comps.iter()).cloned().collect(),
        };
        let Some(r) = factor_through(&joined1, &joined2) else { return false };
        r.as_permutation().is_some()
    }

    #[test]
    fn synthesis_matches_worked_examples() {
        let a = op_arrow("a", 0);
        let b = op_arrow("b", 0);
        let f = op_arrow("f", 1);
        let nab = duplicator(&t(1));
        // the coordination square for a shared constant
        let (tile, proof) = synthesize_pullback(&nab, &tensor(&a, &a)).unwrap();
        assert_eq!(tile.initial, nab);
        assert_eq!(tile.trigger, tensor(&a, &a));
        assert_eq!(tile.effect, a);
        assert_eq!(tile.final_, identity(&Iface::empty()));
        let sys = basic_tiles(&sig_abf());
        assert_eq!(eval_proof(&proof, &sys).unwrap(), tile);
        for leaf in proof.leaves() {
            assert!(leaf.contains("(a)") || leaf.contains("nabla") || leaf.contains("gamma"));
        }
        // distinct constants do not coordinate
        assert!(synthesize_pullback(&nab, &tensor(&b, &a)).is_none());
        // operator against itself
        let (tile, _) = synthesize_pullback(&f, &f).unwrap();
        assert_eq!(tile, r_op("f", 1));
        // the mirrored variant of the shared constant square
        let (tile, _) = synthesize_pullback(&nab, &tensor(&identity(&t(1)), &a)).unwrap();
        assert_eq!(tile.effect, a);
        check_against_oracle(&nab, &tensor(&identity(&t(1)), &a));
    }

    #[test]
    fn synthesis_handles_structural_cases() {
        let f = op_arrow("f", 1);
        let g = op_arrow("g", 2);
        let a = op_arrow("a", 0);
        let id1 = identity(&t(1));
        let nab = duplicator(&t(1));
        let fa = compose(&a, &f).unwrap();
        let cases: Vec<(Arrow, Arrow)> = vec![
            (nab.clone(), nab.clone()),
            (tensor(&nab, &id1), tensor(&id1, &nab)),
            (tensor(&id1, &nab), tensor(&nab, &id1)),
            (f.clone(), fa.clone()),
            (fa.clone(), f.clone()),
            (tensor(&f, &f), tensor(&id1, &f)),
            (compose(&nab, &tensor(&f, &id1)).unwrap(), tensor(&f, &f)),
            (compose(&nab, &g).unwrap(), f.clone()),
            (discharger(&t(1)), discharger(&t(1))),
            (tensor(&a, &id1), tensor(&id1, &a)),
            (
                compose(&nab, &tensor(&id1, &f)).unwrap(),
                compose(&nab, &tensor(&f, &id1)).unwrap(),
            ),
            (symmetry(&t(1), &t(1)), nab.clone()),
            (nab.clone(), symmetry(&t(1), &t(1))),
            (
                compose(&nab, &tensor(&nab, &id1)).unwrap(),
                compose(&nab, &tensor(&id1, &nab)).unwrap(),
            ),
            (tensor(&tensor(&a, &a), &id1), tensor(&nab, &id1)),
            (tensor(&nab, &nab), tensor(&id1, &tensor(&nab, &id1))),
        ];
        for (north, west) in &cases {
            assert_eq!(north.cod, west.cod, "bad case: {north} vs {west}");
            check_against_oracle(north, west);
        }
    }

    #[test]
    fn occurs_failure_has_no_square() {
        // <x1, f(x1)> against the duplicator would need x = f(x)
        let north = Arrow {
            dom: t(1),
            cod: t(2),
            comps: vec![
                Component::T(PlTerm::Hole(1)),
                Component::T(PlTerm::App("f".into(), vec![PlTerm::Hole(1)])),
            ],
        };
        assert!(synthesize_pullback(&north, &duplicator(&t(1))).is_none());
        assert!(pullback_oracle(&north, &duplicator(&t(1))).is_none());
    }

    #[test]
    fn exchange_law_on_a_composable_quadruple() {
        let a = d_op("f", 1);
        let b = hid(&a.effect);
        let c = vid(&a.final_);
        let d = hid(&identity(&a.effect.dom));
        assert_eq!(a.effect, b.trigger);
        assert_eq!(a.final_, c.initial);
        assert_eq!(b.final_, d.initial);
        assert_eq!(c.effect, d.trigger);
        let left = hcomp(&vcomp(&a, &c).unwrap(), &vcomp(&b, &d).unwrap()).unwrap();
        let right = vcomp(&hcomp(&a, &b).unwrap(), &hcomp(&c, &d).unwrap()).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn sequential_decompose_recovers_seams() {
        let f = op_arrow("f", 1);
        let a = op_arrow("a", 0);
        let sys = basic_tiles(&sig_abf());
        // split [f;<a> built in two] at the seam
        let rf = r_op("f", 1);
        let t0 = hcomp(&rf, &vid(&a)).unwrap();
        let (ta, tb) = sequential_decompose(&t0, &a, &f, &sys, 2).unwrap();
        assert_eq!(hcomp(&ta, &tb).unwrap(), t0);
        // atomic initial configuration: the trivial split through identities
        let (ta, tb) = sequential_decompose(&rf, &identity(&t(1)), &f, &sys, 2).unwrap();
        assert_eq!(hcomp(&ta, &tb).unwrap(), rf);
    }

    #[test]
    fn proof_render_is_indented() {
        let (_, proof) = lift_r(&compose(&op_arrow("a", 0), &op_arrow("f", 1)).unwrap()).unwrap();
        let rendered = proof.render();
        assert!(rendered.contains("R(f)"));
        assert!(rendered.lines().count() >= 3);
        assert!(rendered.lines().any(|l| l.starts_with("  ")));
    }
}

#[cfg(test)]
mod random_tests {
    use super::tests::projections_equal_up_to_apex;
    use super::*;
    use crate::gen::{random_arrow, Rng};
    use crate::unify::pullback_oracle;

    #[test]
    fn synthesis_agrees_with_oracle_on_random_cospans() {
        let mut rng = Rng::new(0x5eed_1234);
        let mut solvable = 0;
        let mut unsolvable = 0;
        for round in 0..400 {
            let z = 1 + rng.below(3);
            let dn = rng.below(3);
            let dw = rng.below(3);
            let north = random_arrow(&mut rng, dn, z, 2);
            let west = random_arrow(&mut rng, dw, z, 2);
            let synth = synthesize_pullback(&north, &west);
            let oracle = pullback_oracle(&north, &west);
            match (&synth, &oracle) {
                (None, None) => unsolvable += 1,
                (Some((tile, _)), Some(pb)) => {
                    solvable += 1;
                    assert!(tile.commutes(), "round {round}: no commute {north} {west}");
                    assert!(
                        projections_equal_up_to_apex(
                            &tile.effect,
                            &tile.final_,
                            &pb.proj_left,
                            &pb.proj_right
                        ),
                        "round {round}: projections differ\n north={north}\n west={west}\n tile={tile}\n oracle=({}, {})",
                        pb.proj_left,
                        pb.proj_right
                    );
                }
                _ => panic!(
                    "round {round}: disagreement north={north} west={west} synth={} oracle={}",
                    synth.is_some(),
                    oracle.is_some()
                ),
            }
        }
        assert!(solvable > 20, "generator too skewed: {solvable} solvable");
        assert!(unsolvable > 50, "generator too skewed: {unsolvable} unsolvable");
    }

    #[test]
    fn synthesis_succeeds_on_solvable_cospans() {
        use crate::gen::random_anti_instance;
        let mut rng = Rng::new(0xfeed_beef);
        for round in 0..200 {
            let z = 1 + rng.below(3);
            let dn = rng.below(3);
            let north = random_arrow(&mut rng, dn, z, 2);
            let du = rng.below(3);
            let mediator = random_arrow(&mut rng, du, dn, 2);
            let base = compose(&mediator, &north).unwrap();
            let west = random_anti_instance(&mut rng, &base);
            let (tile, _) = synthesize_pullback(&north, &west).unwrap_or_else(|| {
                panic!("round {round}: solvable cospan rejected: north={north} west={west}")
            });
            assert!(tile.commutes());
            let pb = pullback_oracle(&north, &west).expect("oracle must agree");
            assert!(projections_equal_up_to_apex(
                &tile.effect,
                &tile.final_,
                &pb.proj_left,
                &pb.proj_right
            ));
        }
    }
}

/// Exchange-law suite: for randomly generated composable quadruples, the
/// two ways of pasting a 2x2 block of tiles agree. Returns the number of
/// failures.
pub fn exchange_suite(seed: u64, rounds: usize) -> usize {
    use crate::gen::{random_arrow, Rng};
    let mut rng = Rng::new(seed);
    let mut failures = 0usize;
    for _ in 0..rounds {
        // a random commuting seed tile and three identity-based companions
        let n = 1 + rng.below(3);
        let dn = rng.below(3) + n;
        let north = random_arrow(&mut rng, dn, n, 2);
        let a = vid(&north);
        let b = hid(&a.effect);
        let dw = rng.below(3);
        let west = random_arrow(&mut rng, dw, a.final_.cod.len(), 2);
        let c = match synthesize_pullback(&a.final_, &west) {
            Some((tile, _)) => tile,
            None => vid(&a.final_),
        };
        let d = hid(&c.effect);
        let ac = match vcomp(&a, &c) {
            Ok(t) => t,
            Err(_) => continue,
        };
        let bd = match vcomp(&b, &d) {
            Ok(t) => t,
            Err(_) => continue,
        };
        let left = hcomp(&ac, &bd);
        let ab = hcomp(&a, &b).unwrap();
        let cd = match hcomp(&c, &d) {
            Ok(t) => t,
            Err(_) => continue,
        };
        let right = vcomp(&ab, &cd);
        match (left, right) {
            (Ok(l), Ok(r)) if l == r => {}
            _ => failures += 1,
        }
    }
    failures
}

#[cfg(test)]
mod exchange_suite_tests {
    #[test]
    fn exchange_suite_is_clean() {
        assert_eq!(super::exchange_suite(42, 50), 0);
    }
}

#[cfg(test)]
mod fidelity_tests {
    use super::*;
    use crate::gen::{generator_signature, random_arrow, Rng};

    #[test]
    fn random_synthesis_proofs_evaluate_back() {
        let mut sig = Signature::default();
        sig.functions = generator_signature();
        let sys = basic_tiles(&sig);
        let mut rng = Rng::new(0xf1de11);
        let mut produced = 0;
        for _ in 0..150 {
            let z = 1 + rng.below(3);
            let dn = rng.below(3);
            let dw = rng.below(3);
            let north = random_arrow(&mut rng, dn, z, 2);
            let west = random_arrow(&mut rng, dw, z, 2);
            if let Some((tile, proof)) = synthesize_pullback(&north, &west) {
                produced += 1;
                assert_eq!(eval_proof(&proof, &sys).unwrap(), tile);
            }
        }
        assert!(produced > 20);
    }
}
