//! Exact-arithmetic workbench for higher-depth algebraic structures.
//!
//! Everything here computes over arbitrary-precision rationals: validating
//! N-complexes and depth-N differential graded algebras, expanding
//! coderivation powers on truncated tensor coalgebras, enumerating the planar
//! trees behind the higher associativity identities, counting operad
//! components, solving the generalized Maurer-Cartan coefficient system, and
//! computing deformation cohomology. There is no floating point anywhere;
//! every verdict is exact.

pub mod coalgebra;
pub mod deformation;
pub mod exact;
pub mod graded;
pub mod maurer_cartan;
pub mod operads;
pub mod structures;
pub mod trees;
