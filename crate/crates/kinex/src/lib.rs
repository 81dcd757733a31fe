//! Cross-country inequality analytics and a kinetic model of wealth
//! exchange.
//!
//! The crate has two halves that meet in the middle:
//!
//! * **Empirical**: ingest country-by-year indicator panels ([`panel`]),
//!   turn them into correlation and distance matrices, low-dimensional maps
//!   and spanning trees ([`comove`]), and run simple cross-sectional
//!   regressions with t-based inference ([`regress`]).
//! * **Model**: simulate pairwise wealth exchange with a saving propensity
//!   and compare the stationary distribution and its Gini coefficient
//!   against the closed-form Gamma law ([`kem`]).
//!
//! Everything that involves randomness is seeded and reproducible bit for
//! bit; everything that can fail returns [`Error`] with a stable
//! machine-parsable code.
//!
//! # Example
//!
//! ```
//! use kinex::kem::{self, SimConfig};
//!
//! // Saving propensity 0.5 gives a stationary Gamma law of shape 4 whose
//! // Gini coefficient is 0.2734375 exactly.
//! let n = kem::n_of_lambda(0.5)?;
//! assert_eq!(n, 4.0);
//! assert!((kem::gini_analytic(n)? - 0.2734375).abs() < 1e-12);
//!
//! // A short seeded run lands near that value.
//! let cfg = SimConfig {
//!     n_agents: 200,
//!     lambda: 0.5,
//!     sweeps: 200,
//!     thermalization: 200,
//!     ..SimConfig::default()
//! };
//! let run = kem::simulate(&cfg)?;
//! let gini = kem::sample_gini(run.state.wealths())?;
//! assert!((gini - 0.2734375).abs() < 0.05);
//! # Ok::<(), kinex::Error>(())
//! ```

pub mod comove;
pub mod error;
pub mod kem;
pub mod numeric;
pub mod panel;
pub mod regress;

pub use error::{Error, Result};

// Compile and run every code block in the book, so the guide cannot drift
// from the API it documents.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            pub struct $name;
        };
    }

    chapter!(Readme, "../../../README.md");
    chapter!(Introduction, "../../../book/src/introduction.md");
    chapter!(Panels, "../../../book/src/panels.md");
    chapter!(Comovement, "../../../book/src/comovement.md");
    chapter!(Regression, "../../../book/src/regression.md");
    chapter!(ExchangeModel, "../../../book/src/exchange-model.md");
    chapter!(Cli, "../../../book/src/cli.md");
}
