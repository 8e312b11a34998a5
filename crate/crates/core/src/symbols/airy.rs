use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::poly::{check_point, terms_from_json, terms_to_json, Poly, TermJson};
use crate::config::PhaseConfig;
use crate::error::{Result, StargenError};
use crate::linalg::CVec;
use crate::special::airy_pair;

/// `exp(vᵀz + c) · [P(z) Ai(u(z)) + Q(z) Ai'(u(z))]` with polynomial `P`,
/// `Q` and real-valued argument polynomial `u`.
///
/// The class is closed under differentiation thanks to `Ai'' = u Ai`, so
/// polynomial star products with these symbols are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct AirySymbol {
    pub config: PhaseConfig,
    pub v: CVec,
    pub c: C64,
    pub ai: Poly,
    pub aip: Poly,
    pub arg: Poly,
}

#[derive(Serialize, Deserialize)]
struct AiryJson {
    config: PhaseConfig,
    v: Vec<[f64; 2]>,
    c: [f64; 2],
    ai: Vec<TermJson>,
    aip: Vec<TermJson>,
    arg: Vec<TermJson>,
}

impl AirySymbol {
    /// `scale · exp(vᵀz + c) · Ai(u(z))`.
    pub fn new(config: PhaseConfig, v: CVec, c: C64, scale: C64, arg: Poly) -> Self {
        let n = config.nvars();
        assert_eq!(arg.nvars(), n);
        assert_eq!(v.len(), n);
        Self { config, v, c, ai: Poly::constant(n, scale), aip: Poly::zero(n), arg }
    }

    pub fn eval(&self, z: &[f64]) -> Result<C64> {
        check_point(&self.config, z)?;
        let u = self.arg.eval_real(z).re;
        let (ai, aip) = airy_pair(u);
        let lin: C64 = self.v.iter().zip(z).map(|(vi, zi)| vi * zi).sum::<C64>() + self.c;
        Ok(lin.exp() * (self.ai.eval_real(z) * ai + self.aip.eval_real(z) * aip))
    }

    fn with(&self, ai: Poly, aip: Poly) -> Self {
        Self { config: self.config, v: self.v.clone(), c: self.c, ai, aip, arg: self.arg.clone() }
    }

    pub fn derivative(&self, var: usize) -> Self {
        let du = self.arg.derivative(var);
        let vj = self.v[var];
        let ai = self.ai.derivative(var).add(&self.ai.scale(vj)).add(&self.aip.mul(&self.arg).mul(&du));
        let aip = self.ai.mul(&du).add(&self.aip.derivative(var)).add(&self.aip.scale(vj));
        self.with(ai, aip)
    }

    pub fn mul_poly(&self, p: &Poly) -> Self {
        self.with(self.ai.mul(p), self.aip.mul(p))
    }

    pub fn scale(&self, s: C64) -> Self {
        self.with(self.ai.scale(s), self.aip.scale(s))
    }

    /// Sum of two symbols with identical exponent and argument.
    pub fn add(&self, o: &AirySymbol) -> Self {
        assert!(self.arg == o.arg && self.v == o.v, "incompatible Airy symbols");
        let r = (o.c - self.c).exp();
        self.with(self.ai.add(&o.ai.scale(r)), self.aip.add(&o.aip.scale(r)))
    }

    pub fn sub(&self, o: &AirySymbol) -> Self {
        self.add(&o.scale(C64::new(-1.0, 0.0)))
    }

    pub fn is_zero(&self) -> bool {
        self.ai.is_zero() && self.aip.is_zero()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(AiryJson {
            config: self.config,
            v: self.v.iter().map(|x| [x.re, x.im]).collect(),
            c: [self.c.re, self.c.im],
            ai: terms_to_json(&self.ai),
            aip: terms_to_json(&self.aip),
            arg: terms_to_json(&self.arg),
        })
        .expect("airy symbol serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: AiryJson = serde_json::from_value(v.clone())?;
        j.config.validate()?;
        let n = j.config.nvars();
        if j.v.len() != n {
            return Err(StargenError::DimensionMismatch { expected: n, got: j.v.len() });
        }
        let arg = terms_from_json(n, &j.arg)?;
        if arg.terms().values().any(|c| c.im != 0.0) {
            return Err(StargenError::InvalidConfig("Airy argument must be real".into()));
        }
        Ok(Self {
            config: j.config,
            v: CVec::from_iterator(n, j.v.iter().map(|p| C64::new(p[0], p[1]))),
            c: C64::new(j.c[0], j.c[1]),
            ai: terms_from_json(n, &j.ai)?,
            aip: terms_from_json(n, &j.aip)?,
            arg,
        })
    }

    /// Largest coefficient of `P` and `Q`, weighted by `|e^c|`.
    pub fn max_coeff(&self) -> f64 {
        self.ai.max_coeff().max(self.aip.max_coeff()) * self.c.exp().norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let cfg = PhaseConfig::unit(1);
        let arg = Poly::from_terms(2, [(vec![2, 0], C64::new(1.0, 0.0)), (vec![0, 1], C64::new(2.0, 0.0))]);
        let s = AirySymbol::new(
            cfg,
            CVec::from_vec(vec![C64::new(0.0, -0.3), C64::new(0.0, 0.0)]),
            C64::new(0.1, 0.2),
            C64::new(2.0, 0.0),
            arg,
        )
        .derivative(0);
        assert_eq!(AirySymbol::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let cfg = PhaseConfig::unit(1);
        // 2 e^{-i p} Ai(p² + 2q - 1)
        let arg = Poly::from_terms(
            2,
            [(vec![2, 0], C64::new(1.0, 0.0)), (vec![0, 1], C64::new(2.0, 0.0)), (vec![0, 0], C64::new(-1.0, 0.0))],
        );
        let s = AirySymbol::new(
            cfg,
            CVec::from_vec(vec![C64::new(0.0, -1.0), C64::new(0.0, 0.0)]),
            C64::new(0.0, 0.0),
            C64::new(2.0, 0.0),
            arg,
        );
        let h = 1e-5;
        let z = [0.4, -0.3];
        for var in 0..2 {
            let d = s.derivative(var);
            let mut zp = z;
            let mut zm = z;
            zp[var] += h;
            zm[var] -= h;
            let fd = (s.eval(&zp).unwrap() - s.eval(&zm).unwrap()) / (2.0 * h);
            assert!((d.eval(&z).unwrap() - fd).norm() < 1e-8);
            let dd = d.derivative(var);
            let fd2 = (s.eval(&zp).unwrap() - s.eval(&z).unwrap() * 2.0 + s.eval(&zm).unwrap()) / (h * h);
            assert!((dd.eval(&z).unwrap() - fd2).norm() < 1e-4);
        }
    }
}
