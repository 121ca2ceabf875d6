//! Numerical library for the Boltzmann weights, measures, and normalization
//! kernels of a basic-hypergeometric lattice spin model, together with
//! residual checkers for the relations the model satisfies: the
//! star-triangle relation, a six-flavor basic hypergeometric sum/integral
//! identity, the transformation identity of a multivariate sum/integral, the
//! star-star relation, the IRF (interaction-round-a-face) Yang-Baxter
//! equation, and the classical `q -> 1` degeneration to a gamma-function
//! model.
//!
//! Spins carry a continuous angle and a discrete integer charge; pair
//! weights are built from `q`-Pochhammer flavor blocks evaluated in log
//! space, and every identity is verified by evaluating both sides
//! independently and reporting a relative residual.
//!
//! # Quick example
//!
//! Evaluate a pair weight and check the star-triangle relation at one
//! spectral triple:
//!
//! ```
//! use qlattice::qkernel::QContext;
//! use qlattice::weights::{boltzmann_w, SignConvention, Spin};
//! use qlattice::identities::check_star_triangle;
//!
//! let ctx = QContext::new(0.4).unwrap();
//! let sign = SignConvention::EtaMinusAlpha;
//! let eta = sign.eta();
//!
//! let si = Spin::new(0.7, 1);
//! let sj = Spin::new(2.1, -1);
//! let sk = Spin::new(4.0, 0);
//!
//! // A pair weight is a finite complex number...
//! let w = boltzmann_w(0.15, eta, &si, &sj, sign, &ctx).unwrap();
//! assert!(w.norm().is_finite() && w.norm() > 0.0);
//!
//! // ...and the star-triangle relation closes to the context tolerance.
//! let (alpha, beta) = (0.15, 0.2);
//! let gamma = eta - alpha - beta;
//! let report = check_star_triangle(alpha, beta, gamma, [&si, &sj, &sk], sign, &ctx).unwrap();
//! assert!(report.pass, "rel residual {}", report.rel_residual);
//! ```

pub mod engine;
pub mod error;
pub mod identities;
pub mod qkernel;
pub mod suite;
pub mod weights;

pub use engine::ResidualReport;
pub use error::{QError, QResult};
pub use qkernel::QContext;

/// Every code block in the guide (`book/`) compiles and runs as a doc-test
/// of this crate, so the book cannot drift out of sync with the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/qkernel.md")]
    mod qkernel {}
    #[doc = include_str!("../../../book/src/weights.md")]
    mod weights {}
    #[doc = include_str!("../../../book/src/engine.md")]
    mod engine {}
    #[doc = include_str!("../../../book/src/identities.md")]
    mod identities {}
    #[doc = include_str!("../../../book/src/suite.md")]
    mod suite {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
