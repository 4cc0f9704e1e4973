//! Matrix-group instantiation of the FACTOR cryptosystem and key exchange,
//! together with the two linear-algebra attacks that break them:
//!
//! * the span method, which solves a commutation equation inside `Lin(<g>)`
//!   and samples an invertible solution;
//! * linear decomposition, which writes intercepted elements in a tagged
//!   basis of `Lin(<g> c <h>)` and substitutes into the basis monomials.
//!
//! Everything is exact arithmetic over a prime field.

pub mod attacks;
pub mod bench;
pub mod error;
pub mod factor_scheme;
pub mod gfp;
pub mod matgfp;
pub mod span;
pub mod wire;

pub use attacks::{AttackMethod, AttackReport, CommutationSolutionSpace};
pub use bench::{GeneratorFamily, Instance, InstanceSpec, TrialSummary};
pub use error::{Error, Result};
pub use factor_scheme::{Ciphertext, ExponentRange, KexToken, PrivateKey, PublicKey, Role};
pub use gfp::{FieldElement, PrimeField};
pub use matgfp::{Matrix, RowEchelon, RrefResult};
pub use span::TaggedBasis;
pub use wire::{Message, Wire};
