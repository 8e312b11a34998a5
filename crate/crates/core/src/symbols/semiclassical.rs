use num_complex::Complex64 as C64;

use super::gauss::GaussSymbol;
use super::poly::{check_point, PolySymbol};
use crate::error::{Result, StargenError};

/// `Θ₁ = A_qq A_pp − A_qp²` and `Θ₂ = A_qq A_p² − 2 A_qp A_q A_p + A_pp A_q²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaCoefficients {
    pub theta1: PolySymbol,
    pub theta2: PolySymbol,
}

pub fn theta_coeffs(a: &PolySymbol) -> Result<ThetaCoefficients> {
    if a.config.dim_n != 1 {
        return Err(StargenError::Unsupported("theta coefficients need one degree of freedom".into()));
    }
    let (p, q) = (0, 1);
    let ap = a.derivative(p);
    let aq = a.derivative(q);
    let app = ap.derivative(p);
    let aqq = aq.derivative(q);
    let aqp = aq.derivative(p);
    let theta1 = aqq.mul(&app).sub(&aqp.mul(&aqp));
    let theta2 = aqq.mul(&ap.mul(&ap)).sub(&aqp.mul(&aq).mul(&ap).scale_re(2.0)).add(&app.mul(&aq.mul(&aq)));
    Ok(ThetaCoefficients { theta1, theta2 })
}

/// `prefactor(z) · exp(exponent(z))` for the O(ħ²) star-exponential.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiclassicalExp {
    pub prefactor: PolySymbol,
    pub exponent: PolySymbol,
}

impl SemiclassicalExp {
    pub fn eval(&self, z: &[f64]) -> Result<C64> {
        check_point(&self.prefactor.config, z)?;
        Ok(self.prefactor.poly.eval_real(z) * self.exponent.poly.eval_real(z).exp())
    }

    /// The same evaluator as a Gaussian symbol, when `A` is at most quadratic.
    pub fn to_gauss(&self) -> Result<GaussSymbol> {
        GaussSymbol::from_exponent(self.prefactor.clone(), &self.exponent)
    }
}

/// `[1 + ½(iħ/2)²(ik)²Θ₁ + (1/6)(iħ/2)²(ik)³Θ₂] e^{ikA}`, accurate to O(ħ⁴).
///
/// The ħ-expansion need not converge order by order; this is the plain
/// truncation.
pub fn star_exp_semiclassical(a: &PolySymbol, k: f64) -> Result<SemiclassicalExp> {
    let th = theta_coeffs(a)?;
    let h2 = C64::new(0.0, a.config.hbar / 2.0).powu(2);
    let ik = C64::new(0.0, k);
    let prefactor = PolySymbol::one(a.config)
        .add(&th.theta1.scale(h2 * ik * ik * 0.5))
        .add(&th.theta2.scale(h2 * ik * ik * ik / 6.0));
    Ok(SemiclassicalExp { prefactor, exponent: a.scale(ik) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PhaseConfig;

    fn cfg() -> PhaseConfig {
        PhaseConfig::unit(1)
    }

    #[test]
    fn oscillator_thetas() {
        let p = PolySymbol::p(cfg(), 0);
        let q = PolySymbol::q(cfg(), 0);
        let h = p.mul(&p).add(&q.mul(&q)).scale_re(0.5);
        let th = theta_coeffs(&h).unwrap();
        assert!(th.theta1.max_diff(&PolySymbol::one(cfg())) < 1e-15);
        assert!(th.theta2.max_diff(&h.scale_re(2.0)) < 1e-15);
    }

    #[test]
    fn linear_potential_thetas() {
        let p = PolySymbol::p(cfg(), 0);
        let q = PolySymbol::q(cfg(), 0);
        let h = p.mul(&p).scale_re(0.5).add(&q);
        let th = theta_coeffs(&h).unwrap();
        assert!(th.theta1.poly.is_zero());
        assert!(th.theta2.max_diff(&PolySymbol::one(cfg())) < 1e-15);
        let lin = theta_coeffs(&q.add(&p)).unwrap();
        assert!(lin.theta1.poly.is_zero() && lin.theta2.poly.is_zero());
    }

    #[test]
    fn rejects_two_dimensions() {
        let c2 = PhaseConfig::unit(2);
        assert!(theta_coeffs(&PolySymbol::q(c2, 0)).is_err());
    }

    #[test]
    fn classical_limit() {
        let p = PolySymbol::p(cfg(), 0);
        let q = PolySymbol::q(cfg(), 0);
        let h = p.mul(&p).add(&q.mul(&q)).scale_re(0.5);
        let mut small = h.clone();
        small.config.hbar = 1e-9;
        let e = star_exp_semiclassical(&small, 0.7).unwrap();
        let z = [0.4, -0.9];
        let exact = (C64::new(0.0, 0.7) * h.eval(&z).unwrap()).exp();
        assert!((e.eval(&z).unwrap() - exact).norm() < 1e-12);
    }

    #[test]
    fn linear_potential_correction_is_cubic_phase() {
        // e^{ikH + ik³/24} to first order in the correction: 1 + ik³/24.
        let p = PolySymbol::p(cfg(), 0);
        let q = PolySymbol::q(cfg(), 0);
        let h = p.mul(&p).scale_re(0.5).add(&q);
        let k = 0.8;
        let e = star_exp_semiclassical(&h, k).unwrap();
        let expect = C64::new(1.0, k * k * k / 24.0);
        assert!(e.prefactor.max_diff(&PolySymbol::constant(cfg(), expect)) < 1e-15);
    }
}
