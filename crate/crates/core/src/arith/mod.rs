//! Exact arithmetic over ℚ and its completions.

pub mod hensel;
pub mod oracle;
mod place;
pub mod primes;
mod square_class;
mod symbols;
mod valuation;

pub use hensel::{hensel_solve, lift_seed, HenselOutcome, HenselWitness, Poly2, Var};
pub use place::{Place, Prime};
pub use primes::{factor, is_prime, is_prime_big, prime_stream, PrimeStream, MILLER_RABIN_LIMIT};
pub use square_class::{LocalSquareClass, SquareClass};
pub use symbols::{hilbert_symbol, is_local_square, jacobi, legendre, legendre_euler, sqrt_mod};
pub use valuation::{split_power, valuation, valuation_int, valuation_or_inf};
