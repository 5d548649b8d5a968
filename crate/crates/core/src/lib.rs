//! Exact-arithmetic Hecke operators on Fourier expansions of Siegel and
//! Hilbert modular forms.
//!
//! Everything here is computed over exact rings (arbitrary-precision
//! integers and rationals, cyclotomic integers): no floating point
//! anywhere. The main pieces are
//!
//! * [`exact`] — integer/rational/cyclotomic scalars, integer matrices,
//!   Smith normal form, division-free characteristic polynomials;
//! * [`fourier`] — half-integral index matrices, q-expansion containers
//!   and their text format;
//! * [`weights`] — tensor-product models of `GL_n` representations with
//!   highest weight `(k_1, ..., k_n)`;
//! * [`cosets`] — coset representative systems for the Hecke double
//!   cosets at similitude `p^delta` and `p^2`, plus a brute-force
//!   lattice oracle;
//! * [`hecke`] — Gauss sums and the coefficient-level Hecke action;
//! * [`integrality`] — eigenvalue integrality certificates and the
//!   combinatorial bound scans;
//! * [`hilbert`] — real quadratic ideal arithmetic and the ideal-indexed
//!   Hecke coefficient recursion;
//! * [`corpus`] — independent oracle series (Eisenstein, the
//!   discriminant cusp form, E8 theta series).

pub mod acceptance;
pub mod corpus;
pub mod cosets;
pub mod error;
pub mod exact;
pub mod fourier;
pub mod hecke;
pub mod hilbert;
pub mod integrality;
pub mod weights;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
