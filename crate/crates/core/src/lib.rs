//! Pure logic programming with two interchangeable resolution engines.
//!
//! The classical engine runs SLD resolution with mgu-based unification. The
//! second engine represents programs as tile systems: each clause becomes a
//! basic tile, and unification is carried out by synthesizing pullback
//! squares from a finite basis of coordination tiles. Both engines compute
//! the same answer substitutions; the tile engine additionally yields proof
//! terms, goal equivalences and a causal reading of refutations.

pub mod causality;
pub mod gen;
pub mod engine;
pub mod semantics;
pub mod syntax;
pub mod theory;
pub mod tiles;
pub mod unify;
