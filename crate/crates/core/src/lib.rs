//! Numerical laboratory for multi-peak blow-up solutions of the sinh-Poisson
//! Dirichlet problem
//!
//! ```text
//!   -Δu = ρ² (e^u - e^{-u})   in Ω,       u = 0   on ∂Ω,
//! ```
//!
//! on model domains (discs and rectangles). The crate builds the m-peak
//! bubble ansatz located at critical points of the Kirchhoff-Routh
//! Hamiltonian, continues it to a true discrete solution with a damped
//! Newton method, solves the weighted eigenvalue problem
//! `-Δv = μ ρ²(e^u + e^{-u}) v` of the linearization, and verifies the
//! asymptotic eigenvalue laws and the Morse-index count `#{μ < 1}` against
//! closed-form predictions from the Hamiltonian's scaled Hessian.
//!
//! Module map:
//! - [`geom`]: points, 2×2 matrices, model domains.
//! - [`greens`]: Dirichlet Green function, regular part, Robin function and
//!   their derivatives (closed form on discs, image series on rectangles).
//! - [`hamiltonian`]: Kirchhoff-Routh function, critical-point search and
//!   the scaled Hessian spectrum η.
//! - [`ansatz`]: Liouville bubbles, projected bubbles, m-peak approximate
//!   solutions, far-field limits.
//! - [`pde`]: Shortley-Weller discretization of -Δ and the Newton /
//!   continuation solvers.
//! - [`spectrum`]: the generalized eigenproblem of the linearization,
//!   sup-normalization, Morse counting and peak rescaling.
//! - [`asymptotics`]: profile fits, regime rate checks, far-field
//!   comparisons, the limit eigenproblem and the integral-identity checkers.

pub mod ansatz;
pub mod asymptotics;
pub mod error;
pub mod geom;
pub mod greens;
pub mod hamiltonian;
pub mod linalg;
pub mod pde;
pub mod spectrum;

pub use error::{Error, Result};
pub use geom::{DomainSpec, Mat2, Point2};
