//! Genus-zero Knizhnik–Zamolodchikov theory, computed.
//!
//! The crate is layered bottom-up:
//!
//! * [`lie`]: root data, normalized invariant form and scalar invariants.
//! * [`rep`]: irreducible modules with exact Chevalley generators.
//! * [`tensor`]: tensor products, invariants and the Casimir operators Ωⁱʲ.
//! * [`fusion`] and [`blocks`]: level-k fusion rules and the conformal-block
//!   subspace at a configuration of marked points.
//! * [`kz`]: the KZ one-form, exact flatness and the rotation monodromy.
//! * [`transport`]: numerical parallel transport and braid monodromy.
//! * [`bbw`]: the rank-one Bott–Borel–Weil realization.
//!
//! Algebra is exact ([`exact::Q`], [`exact::CQ`]); floating point enters only
//! through the positions of marked points.

pub mod bbw;
pub mod blocks;
pub mod error;
pub mod exact;
pub mod fusion;
pub mod kz;
pub mod lie;
pub mod linalg;
pub mod ode;
pub mod rep;
pub mod tensor;
pub mod transport;

pub use error::{Error, ErrorKind, Result};
pub use lie::{LieAlgebra, Series, Weight};
pub use rep::Representation;
