//! Completely multiplicative ±1 functions with long runs of +1 values.
//!
//! The building blocks are real characters modified at the primes dividing
//! their modulus ([`ModifiedCharacter`]) and their further flips at a finite
//! set of primes ([`CMFunction`]). On top of those sit window searches
//! ([`patterns`]), the CRT construction that turns a character's best window
//! into an all-+1 window ([`extension`]), numerical checks on logarithmic
//! means and a digit-based lower bound ([`analytic`]), and a catalog of
//! functions whose run lengths are known ([`catalog`]).
//!
//! ```
//! use signpattern::{extension, ModifiedCharacter, RealCharacter};
//!
//! let chi = ModifiedCharacter::uniform(RealCharacter::kronecker(5).unwrap(), 1).unwrap();
//! let ext = extension::extend(&chi, 4, 10_000).unwrap();
//! assert_eq!(ext.f.flips(), [7]);
//! assert!((4..=7).all(|n| ext.f.value(n) == 1));
//! ```

pub mod analytic;
pub mod arith;
pub mod catalog;
pub mod characters;
pub mod cli;
pub mod extension;
pub mod patterns;

pub use characters::{CMFunction, CharacterKind, ModifiedCharacter, RealCharacter, SignFunction};
pub use extension::{extend, Extension, ExtensionPlan};
pub use patterns::{longest_run, min_minus_window, sign_pattern, DeltaEstimate, WindowReport};
