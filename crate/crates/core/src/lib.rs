//! Exact slope calculus for Newton polygons, isocrystals, and friends.
//!
//! The crate is organized around a single currency: a sorted multiset of
//! rational slopes and its convex Newton polygon ([`np`]). On top of that it
//! provides
//!
//! - finite-precision p-adic scalars and unramified extensions with their
//!   Frobenius ([`padic`], [`ffield`]),
//! - Newton-slope computation for isocrystals over finite fields and the
//!   standard rank-h models of a given slope ([`isocrystal`]),
//! - Harder–Narasimhan polygon bookkeeping, Kottwitz-set enumeration and the
//!   split-case weak admissibility test ([`hn`]),
//! - arithmetic in the cyclic division algebra attached to a slope,
//!   including its matrix splitting over the maximal unramified subfield
//!   ([`dlambda`]),
//! - a small but faithful model of points of the adic closed unit disk with
//!   Gauss norms, specialization and tubes ([`disk`]),
//! - the Newton partition of the Legendre-family parameter line ([`legendre`]).
//!
//! All slope arithmetic is exact (no floating point); p-adic values carry an
//! explicit precision so that every comparison states what it actually knows.

pub mod dlambda;
pub mod disk;
pub mod ffield;
pub mod hn;
pub mod isocrystal;
pub mod legendre;
pub mod np;
pub mod padic;
pub mod rat;
pub mod selfcheck;

pub use np::{dominance, NewtonPolygon, OrderResult, SlopeMultiset};
pub use rat::Rat;
