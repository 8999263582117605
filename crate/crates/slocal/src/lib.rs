//! Exact symbolic computation for field algebras, vertex algebras and their
//! S-local generalizations, Hopf algebra actions, smash products, and
//! Zhu-style associative quotients.
//!
//! Everything is computed over arbitrary-precision rationals: no floats, no
//! tolerances. Formal distributions are handled on finite exponent windows,
//! and graded carriers are truncated at a degree cap, so every verdict a
//! checker emits is relative to an explicit degree window
//! ([`fieldalg::DegreeBounds`]). A comparison that would touch a truncated
//! coefficient is reported as `Inconclusive`, never silently passed.
//!
//! Module map:
//!
//! * [`linalg`] — sparse exact vectors, row echelon subspaces, solving,
//!   quotient coordinates.
//! * [`formal`] — Laurent polynomials, two-variable coefficient windows,
//!   the formal delta distribution, binomial expansions `i_{z,w}(z-w)^n`,
//!   scalar Laurent series.
//! * [`report`] — three-valued verdicts and check records.
//! * [`hopf`] — finite-dimensional Hopf algebras as explicit structure
//!   tensors, group algebras, duals, integrals, associative smash products.
//! * [`fieldalg`] — truncated field algebras with state-field products,
//!   axiom suites, locality and S-locality certificates, opposite products,
//!   n-th field products.
//! * [`actions`] — Hopf module structures on field algebras, fixed
//!   subalgebras, comodule/module conversions, the averaged projection.
//! * [`constructions`] — smash field algebras, trivial tensors, double
//!   smashes, matrix algebras, the idempotent vacuum-like element `e`.
//! * [`zhu`] — residue profiles, f-products, the associative quotient
//!   `A(V)`, and the quotient/smash compatibility checks.
//! * [`rep`] — modules over field algebras, generated submodules, tensor
//!   representations, Hopf representations, the module/smash-module
//!   correspondence.
//! * [`quantum`] — h-adic truncations, diagonal braidings, braided
//!   locality checkers, quantum smash products.
//! * [`fixtures`] — deterministic desk-scale examples: polynomial
//!   differential algebras, the rank-one free boson, small groups and
//!   actions.
//! * [`doc`] — a strict JSON document format for every object kind plus
//!   machine-readable reports.

pub mod actions;
pub mod constructions;
pub mod fieldalg;
pub mod fixtures;
pub mod formal;
pub mod hopf;
pub mod linalg;
pub mod report;
pub mod zhu;

/// Exact scalar: arbitrary-precision rational, always reduced, denominator
/// positive. Guaranteed by `num_rational::Ratio` on construction.
pub type Rat = num_rational::BigRational;

/// Build a rational from an integer pair.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

/// Build a rational from an integer.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

/// Library-wide error type. Failure modes carry a human-readable witness
/// where one exists.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("inconsistent linear system: right-hand side not in span")]
    Inconsistent,
    #[error("truncation escape: {0}")]
    TruncationEscape(String),
    #[error("no nonzero left integral exists")]
    NoIntegral,
    #[error("no certificate found: {0}")]
    NoCertificate(String),
    #[error("Hopf axioms fail: {0}")]
    HopfAxioms(String),
    #[error("not a module algebra: {0}")]
    NotModuleAlgebra(String),
    #[error("associative-algebra axioms fail: {0}")]
    AlgebraAxioms(String),
    #[error("action invalid: {0}")]
    ActionInvalid(String),
    #[error("coaction invalid: {0}")]
    CoactionInvalid(String),
    #[error("quotient multiplication not well defined: {0}")]
    NotWellDefined(String),
    #[error("not closed under the products: {0}")]
    NotClosed(String),
    #[error("maps are not inverse algebra isomorphisms: {0}")]
    NotIso(String),
    #[error("not a Hopf representation: {0}")]
    NotHopfRep(String),
    #[error("candidate does not unitize the integral: {0}")]
    NotUnitized(String),
    #[error("braiding incompatible with the action: {0}")]
    BraidingIncompatible(String),
    #[error("format error: {0}")]
    FormatError(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Marker for a computation that left the truncation contract: the value
/// exists in the untruncated object but is not representable in the kept
/// degree window. Converted to [`Error::TruncationEscape`] with context at
/// API boundaries, or counted as a skipped point inside window sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Esc;

impl Esc {
    pub fn ctx(self, what: &str) -> Error {
        Error::TruncationEscape(what.to_string())
    }
}
