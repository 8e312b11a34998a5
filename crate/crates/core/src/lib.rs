//! Star products, star-exponentials and stargenfunctions for phase-space
//! quantum mechanics.
//!
//! Phase-space points are ordered `z = (p_1..p_N, q_1..q_N)` and the
//! symplectic form is `J = [[0, -I], [I, 0]]`, so that `q ⋆ p = qp + iħ/2`.

pub mod config;
pub mod error;
pub mod evolve;
pub mod grid;
pub mod linalg;
pub mod models;
pub mod quad_star;
pub mod special;
pub mod spectral;
pub mod symbols;

pub use config::PhaseConfig;
pub use error::{Result, StargenError};
pub use grid::{Axis, PhaseGrid};
pub use num_complex::Complex64 as C64;
pub use quad_star::{
    factor_sa, star_exp_quadratic, star_exp_symplectic, symplectic_scale, FactorMethod, QuadraticForm, ScaleKind,
    StarFactorization, SymplecticScale,
};
pub use spectral::{Atom, ContinuousKernel, LadderSpec, MeasureKind, SpectralMeasure};
pub use symbols::{
    moyal_bracket, star_exp_semiclassical, star_exp_series, star_gauss, star_poly, star_poly_right, theta_coeffs,
    AirySymbol, GaussSymbol, Poly, PolySymbol, StarOperand, ThetaCoefficients,
};
