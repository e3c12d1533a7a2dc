//! Spectral analysis of magnetic Schrödinger operators with Rashba
//! spin-orbit coupling on metric graphs.
//!
//! The building blocks are the fundamental solutions of the edge equation
//! ([`edge`]), graphs with vertex couplings ([`graph`]), the vertex
//! M-function and its spectral scan ([`mfunction`]), supersymmetric block
//! operators ([`susy`]) and the T3 lattice ([`t3`]).
//!
//! ```
//! use std::f64::consts::PI;
//! use qgraph::t3::{flat_band_certificate, T3Params, T3Torus};
//!
//! let cert = flat_band_certificate(&T3Params::free(PI / 2.0, 0.0), &T3Torus::new(4, PI / 2.0)?)?;
//! assert!(cert.is_flat);
//! # Ok::<(), qgraph::error::Error>(())
//! ```

pub mod edge;
pub mod error;
pub mod linalg;
pub mod roots;
pub mod graph;
pub mod mfunction;
pub mod output;
pub mod susy;
pub mod t3;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/edges.md")]
    mod edges {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/m-function.md")]
    mod m_function {}
    #[doc = include_str!("../../../book/src/susy.md")]
    mod susy {}
    #[doc = include_str!("../../../book/src/t3.md")]
    mod t3 {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
