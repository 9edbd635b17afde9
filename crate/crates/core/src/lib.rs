//! Rational trigonometry over finite fields of odd characteristic and the
//! spectra of finite Poincaré graphs.
//!
//! The pipeline runs bottom-up through five layers:
//!
//! * [`ffield`] — arithmetic in `F_q = F_p[x]/(m(x))`, `q` an odd prime power,
//!   with canonical square roots and primitive elements.
//! * [`trig`] — quadrance, spread, and their projective versions with respect
//!   to a non-degenerate symmetric bilinear form.
//! * [`projective`] — the projective plane `PG(2, q)`, the classification of
//!   points by the quadratic character of their norm, and the point set Ω of
//!   one non-isotropic class carrying `q(q+1)/2` points.
//! * [`pgraph`] — the graphs `P_q(γ)` on Ω (edge ⇔ projective quadrance `γ`),
//!   their eigenvalues, and the `(q+1)/2`-class association scheme they form.
//! * [`census`] — counting pairs at fixed quadrance inside sampled direction
//!   sets and checking the expander-mixing predictions with explicit
//!   certificates.
//!
//! Everything is exact field arithmetic until a spectrum is requested; only
//! eigenvalues and the derived mixing bounds live in `f64`.

// Index loops here walk symmetric index pairs or carry digit positions into
// arithmetic; iterator rewrites obscure that.
#![allow(clippy::needless_range_loop)]

pub mod census;
pub mod ffield;
pub mod pgraph;
pub mod projective;
mod seeded;
pub mod trig;
