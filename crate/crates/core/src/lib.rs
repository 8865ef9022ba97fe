//! Descent-fibration machinery for integral points on the affine conic bundle
//!
//! ```text
//!     U :  a·p_A(t)·x² + b·p_B(t)·y² = 1      over ℤ_{S₀},
//! ```
//!
//! where every `p_i(t) = c_i·t + d_i` is linear and `A ⊔ B` partitions the
//! factor index set `J`.
//!
//! The crate is layered bottom-up:
//!
//! * [`arith`]: valuations, square classes, Legendre/Hilbert symbols,
//!   Hensel lifting, certified primes.
//! * [`f2`]: dense linear algebra over GF(2).
//! * [`surface`]: the validated surface, its fibers, bad places and local points.
//! * [`conditiond`]: the groups `G_D`, `G^D` and the Condition (D) verdict.
//! * [`brauer`]: vertical Brauer generators, residues and local invariants.
//! * [`points`]: local solubility of fibers and global point search.
//! * [`selmer`]: Selmer, dual Selmer and relative Selmer groups.
//! * [`descent`]: the place-enlargement loop producing a [`descent::Certificate`].

pub mod arith;
pub mod brauer;
pub mod conditiond;
pub mod descent;
pub mod error;
pub mod f2;
pub mod format;
pub mod points;
pub mod rational;
pub mod selmer;
pub mod surface;

pub use error::{Error, Result};
pub use rational::Rational;
