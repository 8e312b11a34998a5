//! Phase-space symbols and their star products.

mod airy;
mod gauss;
mod poly;
mod semiclassical;
mod star;

pub use airy::AirySymbol;
pub use gauss::{quadratic_parts, quadratic_poly, GaussSymbol};
pub use poly::{Poly, PolySymbol, PRUNE_REL};
pub use semiclassical::{star_exp_semiclassical, theta_coeffs, SemiclassicalExp, ThetaCoefficients};
pub use star::{
    moyal_bracket, star_exp_series, star_exp_series_capped, star_gauss, star_poly, star_poly_orders, star_poly_right,
    StarOperand, SERIES_CAP,
};
