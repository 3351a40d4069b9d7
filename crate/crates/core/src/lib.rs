//! Exact computer algebra for positive-characteristic function-field
//! arithmetic: Thakur hypergeometric functions, Kochubei and Carlitz
//! (multiple) polylogarithms, Carlitz factorials and Pochhammer–Thakur
//! symbols, and the pre-t-motive period machinery built on Frobenius
//! difference equations.
//!
//! Everything is exact. Series never appear as floating approximations:
//! identities are verified on finite cutoff objects where the Frobenius
//! difference equations hold on the nose after a cutoff shift, and values in
//! the completed field are reported as (exact partial result, error-valuation
//! bound) pairs under the ∞-adic valuation with v(θ) = -1.
//!
//! Module map:
//! - [`field`]: F_q arithmetic (tables, moduli, element formatting)
//! - [`spoly`]: sparse exponent-keyed polynomials over F_q
//! - [`scalar`]: F_q[θ], F_q(θ), the perfected field F_q(u) with
//!   θ = -u^{(q-1)q^M}, and the ∞-adic valuation
//! - [`literal`]: the scalar-literal grammar (parse/print)
//! - [`bivar`]: rational functions in t with factored bracket denominators,
//!   forward Frobenius twists, t-specialization, matrices, cutoff sums
//! - [`symbols`]: Carlitz factorials D_i, L_i and their deformations, and
//!   Pochhammer–Thakur symbols as exponent-vector monomials
//! - [`hypergeom`]: Thakur hypergeometric series (convergence, expansion
//!   profile, cutoff forms, difference equations, values, algebraicity)
//! - [`polylog`]: Kochubei/Carlitz multiple polylogarithms, stuffle products,
//!   star inclusion–exclusion, values
//! - [`motive`]: Ω and P_{b,d} partial products, Frobenius systems Φ/Ψ,
//!   the star-formula Ψ^{-1}, and period values
//! - [`criteria`]: hypothesis checkers and citation-only theorem reports
//! - [`suite`]: the deterministic identity battery behind `suite`

pub mod field;
pub mod spoly;
pub mod scalar;
pub mod literal;
pub mod bivar;
pub mod symbols;
pub mod hypergeom;
pub mod polylog;
pub mod motive;
pub mod criteria;
pub mod suite;

pub use field::{field_create, field_create_with_cap, FieldError, FieldSpec, Fq};
pub use scalar::{PerfectedScalar, RationalScalar, ScalarError, Valuation};
