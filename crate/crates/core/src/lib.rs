//! # ncstat-core
//!
//! Finite-dimensional non-commutative probability spaces with hypotheses,
//! and the Umegaki relative entropy as a functor on them.
//!
//! Algebras are direct sums of full matrix algebras `⊕_x M_{m_x}`. States
//! are stored as one unnormalized density `D_x = p_x ρ_x` per block. A
//! morphism `(B, ξ) → (A, ω)` is a pair `(F, Q)` of a unital
//! *-homomorphism `F: B → A` and a completely positive unital map
//! `Q: A ⇝ B` with `ω∘F = ξ` and `Q∘F = id_B`.
//!
//! ## Modules
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`algebra`] | block algebras, elements, states, Hermitian functional calculus, partial traces |
//! | [`maps`] | *-homomorphisms in standard form, CPU maps via Choi matrices, pushforwards |
//! | [`hypotheses`] | objects, morphisms, rectification to standard form, disintegrations |
//! | [`entropy`] | von Neumann and relative entropy, the RE functor, conditional entropy, convex sums |
//! | [`harness`] | seeded generators, the law driver, and the JSON wire format |
//!
//! ## Conventions
//!
//! - Logarithms are natural; entropies are in nats.
//! - Choi matrices use the column-major vec convention, see [`maps::CpuMap`].
//! - Conditional entropy follows `H(B|C) = S(C) − S(BC)`, the negative of the
//!   usual textbook quantity. See [`entropy::conditional_entropy`].

#![forbid(unsafe_code)]

pub mod algebra;
pub mod entropy;
pub mod harness;
pub mod hypotheses;
pub mod maps;

mod error;

pub use algebra::{AlgebraElement, AlgebraSpec, CMat, State, ValidationReport, Violation, C64};
pub use entropy::ExtendedReal;
pub use error::{Error, Result};
pub use hypotheses::{NcMorphism, NcObject};
pub use maps::{CpuMap, StarHom};

/// Default absolute tolerance for Hermiticity, positivity and normalization checks.
pub const DEFAULT_ATOL: f64 = 1e-9;

/// Default relative eigenvalue cutoff used to decide supports.
pub const DEFAULT_CUTOFF: f64 = 1e-10;

/// Numerical tolerances threaded through the public entry points.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    /// Absolute tolerance for validity checks.
    pub atol: f64,
    /// Relative eigenvalue cutoff for supports and logarithms.
    pub cutoff: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            atol: DEFAULT_ATOL,
            cutoff: DEFAULT_CUTOFF,
        }
    }
}
