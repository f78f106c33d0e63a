//! Desk-scale machinery for filtration combinatorics on finite models of
//! prime spectra, exact multigraded homological invariants of monomial
//! quotient rings, and a symbolic localization-completion calculus.
//!
//! The crate is organized around six cooperating areas:
//!
//! * [`poset`] — finite posets standing in for (windows of) Zariski spectra:
//!   heights, catenarity, connected components, codimension-function solving,
//!   and the monomial-prime window of a monomial quotient ring.
//! * [`spfilt`] — sp-filtrations encoded as order-preserving functions to
//!   `Z ∪ {±∞}`, their level-family views, classification flags (slice,
//!   Cousin conditions, codimension), pullbacks, and canonical filtrations.
//! * [`ring`], [`linalg`], [`complex`] — multigraded monomial quotient
//!   rings with exact (rational or prime-field) coefficients, and finite
//!   cochain complexes of degreewise-computable modules: Koszul and Čech
//!   complexes, tensor/Hom/shift, piecewise homology, and certified
//!   homology support boxes.
//! * [`invariants`] — depth and width via the Koszul and Čech routes,
//!   depth over specialization-closed sets, grade filtrations, cohomology
//!   support, aisle/coaisle membership tests, and the Cohen–Macaulay
//!   concentration check.
//! * [`loccalc`] — a terminating rewrite engine normalizing Hom-expressions
//!   between shifted local-cohomology generators into adelic closed forms,
//!   and the triangular endomorphism-ring presentation they assemble into.
//! * [`arith`] — truncated p-adic and Prüfer-module arithmetic over the
//!   integers, used as a numeric cross-check of the rewrite engine's output
//!   on the integer window.
//!
//! The [`job`] and [`report`] modules provide the jobfile grammar and the
//! canonical structured report format used by the `silt-lab` binary; see the
//! crate's `examples/` directory for one runnable example per capability.

pub mod arith;
pub mod complex;
pub mod corpus;
pub mod extint;
pub mod invariants;
pub mod job;
pub mod linalg;
pub mod loccalc;
pub mod poset;
pub mod report;
pub mod ring;
pub mod spfilt;

pub use extint::ExtInt;
pub use poset::{CodimFunction, FinitePoset, NodeId, PosetError};
pub use spfilt::{FiltrationFlags, OutsidePolicy, SpFiltration, SpfiltError};
