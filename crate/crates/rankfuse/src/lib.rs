//! Effective-rank diagnostics and rank-targeted channel fusion for feature
//! matrices.
//!
//! The crate measures how many directions a representation actually uses
//! (its effective rank), scores channels by how much they contribute to the
//! leading singular directions, and blends the weakest channels of one
//! modality with the matching channels of another so that the fused
//! representation spreads its spectrum over more directions. A validator
//! certifies, bound by bound, the conditions under which that blending is
//! guaranteed to increase effective rank, and a synthetic generator
//! manufactures matrix pairs with prescribed spectra and alignment for
//! testing the whole chain.
//!
//! The narrative guide lives in `book/`; its code snippets compile and run
//! as part of this crate's doctests.

pub mod cli;
pub mod error;
pub mod fusion;
pub mod informativeness;
pub mod io;
pub mod matrix;
pub mod report;
pub mod spectral;
pub mod synth;
pub mod theorem;

pub use error::{Error, Result};
pub use matrix::FeatureMatrix;

#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            #[allow(unused)]
            mod $name {}
        };
    }

    chapter!(index, "../../../book/src/index.md");
    chapter!(effective_rank, "../../../book/src/effective-rank.md");
    chapter!(channel_importance, "../../../book/src/channel-importance.md");
    chapter!(fusion, "../../../book/src/fusion.md");
    chapter!(validation, "../../../book/src/validation.md");
    chapter!(synthetic_data, "../../../book/src/synthetic-data.md");
    chapter!(cli, "../../../book/src/cli.md");
}
