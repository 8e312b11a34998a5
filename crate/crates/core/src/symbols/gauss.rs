use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::poly::{check_point, terms_from_json, terms_to_json, Poly, PolySymbol, TermJson};
use crate::config::PhaseConfig;
use crate::error::{Result, StargenError};
use crate::linalg::{asymmetry, max_abs, max_abs_vec, symmetrize, CMat, CVec};

/// `P(z) · exp(zᵀ M z + vᵀ z + c)` with `M` complex symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussSymbol {
    pub prefactor: PolySymbol,
    pub m: CMat,
    pub v: CVec,
    pub c: C64,
}

#[derive(Serialize, Deserialize)]
struct GaussPartJson {
    #[serde(rename = "M")]
    m: Vec<Vec<[f64; 2]>>,
    v: Vec<[f64; 2]>,
    c: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct GaussJson {
    config: PhaseConfig,
    terms: Vec<TermJson>,
    gauss: GaussPartJson,
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn unpair(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

impl GaussSymbol {
    pub fn new(prefactor: PolySymbol, m: CMat, v: CVec, c: C64) -> Result<Self> {
        let n = prefactor.config.nvars();
        if m.nrows() != n || m.ncols() != n {
            return Err(StargenError::DimensionMismatch { expected: n, got: m.nrows() });
        }
        if v.len() != n {
            return Err(StargenError::DimensionMismatch { expected: n, got: v.len() });
        }
        if asymmetry(&m) > 1e-12 {
            return Err(StargenError::Unsupported("exponent matrix is not symmetric".into()));
        }
        Ok(Self { m: symmetrize(&m), prefactor, v, c })
    }

    /// Pure Gaussian with unit prefactor.
    pub fn pure(config: PhaseConfig, m: CMat, v: CVec, c: C64) -> Result<Self> {
        Self::new(PolySymbol::one(config), m, v, c)
    }

    /// A polynomial viewed as a Gaussian with zero exponent.
    pub fn from_poly(p: PolySymbol) -> Self {
        let n = p.config.nvars();
        Self { prefactor: p, m: CMat::zeros(n, n), v: CVec::zeros(n), c: C64::new(0.0, 0.0) }
    }

    /// `prefactor · exp(exponent)` for an exponent of degree at most two.
    pub fn from_exponent(prefactor: PolySymbol, exponent: &PolySymbol) -> Result<Self> {
        let (m, v, c) = quadratic_parts(&exponent.poly)?;
        Self::new(prefactor, m, v, c)
    }

    pub fn config(&self) -> &PhaseConfig {
        &self.prefactor.config
    }

    pub fn nvars(&self) -> usize {
        self.v.len()
    }

    /// The exponent `zᵀMz + vᵀz + c` as a polynomial.
    pub fn exponent_poly(&self) -> Poly {
        quadratic_poly(&self.m, &self.v, self.c)
    }

    pub fn exponent_at(&self, z: &[f64]) -> C64 {
        let n = self.nvars();
        let mut acc = self.c;
        for i in 0..n {
            let mut row = self.v[i];
            for j in 0..n {
                row += self.m[(i, j)] * z[j];
            }
            acc += row * z[i];
        }
        acc
    }

    pub fn eval(&self, z: &[f64]) -> Result<C64> {
        check_point(self.config(), z)?;
        Ok(self.prefactor.poly.eval_real(z) * self.exponent_at(z).exp())
    }

    pub fn is_zero(&self) -> bool {
        self.prefactor.poly.is_zero()
    }

    pub fn with_prefactor(&self, prefactor: PolySymbol) -> Self {
        Self { prefactor, m: self.m.clone(), v: self.v.clone(), c: self.c }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.with_prefactor(self.prefactor.scale(s))
    }

    pub fn conj(&self) -> Self {
        Self {
            prefactor: self.prefactor.conj(),
            m: self.m.map(|x| x.conj()),
            v: self.v.map(|x| x.conj()),
            c: self.c.conj(),
        }
    }

    /// Pointwise product.
    pub fn mul(&self, o: &GaussSymbol) -> Self {
        Self { prefactor: self.prefactor.mul(&o.prefactor), m: &self.m + &o.m, v: &self.v + &o.v, c: self.c + o.c }
    }

    pub fn mul_poly(&self, p: &Poly) -> Self {
        self.with_prefactor(PolySymbol { config: *self.config(), poly: self.prefactor.poly.mul(p) })
    }

    /// Gradient of the exponent along `z_var` as a linear polynomial.
    pub fn exponent_gradient(&self, var: usize) -> Poly {
        let n = self.nvars();
        let w: Vec<C64> = (0..n).map(|k| self.m[(var, k)] * 2.0).collect();
        Poly::linear(&w, self.v[var])
    }

    pub fn derivative(&self, var: usize) -> Self {
        let p = &self.prefactor.poly;
        let poly = p.derivative(var).add(&p.mul(&self.exponent_gradient(var)));
        self.with_prefactor(PolySymbol { config: *self.config(), poly })
    }

    /// Whether `M` and `v` agree, so that the two symbols can be added.
    pub fn same_exponent(&self, o: &GaussSymbol) -> bool {
        let scale = 1.0 + max_abs(&self.m).max(max_abs_vec(&self.v));
        max_abs(&(&self.m - &o.m)) <= 1e-12 * scale && max_abs_vec(&(&self.v - &o.v)) <= 1e-12 * scale
    }

    /// Sum of two symbols sharing `M` and `v`; the constants may differ.
    pub fn add(&self, o: &GaussSymbol) -> Result<Self> {
        if !self.same_exponent(o) {
            return Err(StargenError::Unsupported("cannot add Gaussians with different exponents".into()));
        }
        if self.is_zero() {
            return Ok(o.clone());
        }
        let rescaled = o.prefactor.scale((o.c - self.c).exp());
        Ok(self.with_prefactor(self.prefactor.add(&rescaled)))
    }

    pub fn sub(&self, o: &GaussSymbol) -> Result<Self> {
        self.add(&o.scale(C64::new(-1.0, 0.0)))
    }

    /// `g(F z + d)`.
    pub fn compose_affine(&self, f: &CMat, d: &CVec) -> Self {
        let n = self.nvars();
        let rows: Vec<Vec<C64>> = (0..n).map(|i| (0..n).map(|j| f[(i, j)]).collect()).collect();
        let dv: Vec<C64> = d.iter().copied().collect();
        let prefactor = self.prefactor.compose_affine(&rows, &dv);
        let m = symmetrize(&(f.transpose() * &self.m * f));
        let v = f.transpose() * (&self.m * d * C64::new(2.0, 0.0) + &self.v);
        let c = self.c + (d.transpose() * &self.m * d)[(0, 0)] + (self.v.transpose() * d)[(0, 0)];
        Self { prefactor, m, v, c }
    }

    /// Largest prefactor-coefficient deviation once both are put on a
    /// common constant; infinite if the exponents differ.
    pub fn max_coeff_diff(&self, o: &GaussSymbol) -> f64 {
        if !self.same_exponent(o) {
            return f64::INFINITY;
        }
        let rescaled = o.prefactor.scale((o.c - self.c).exp());
        self.prefactor.max_diff(&rescaled) * self.c.exp().norm()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let n = self.nvars();
        let gauss = GaussPartJson {
            m: (0..n).map(|i| (0..n).map(|j| pair(self.m[(i, j)])).collect()).collect(),
            v: self.v.iter().map(|x| pair(*x)).collect(),
            c: pair(self.c),
        };
        serde_json::to_value(GaussJson { config: *self.config(), terms: terms_to_json(&self.prefactor.poly), gauss })
            .expect("gaussian serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let gj: GaussJson = serde_json::from_value(v.clone())?;
        gj.config.validate()?;
        let n = gj.config.nvars();
        let poly = terms_from_json(n, &gj.terms)?;
        if gj.gauss.m.len() != n || gj.gauss.m.iter().any(|r| r.len() != n) {
            return Err(StargenError::DimensionMismatch { expected: n, got: gj.gauss.m.len() });
        }
        let m = CMat::from_fn(n, n, |i, j| unpair(gj.gauss.m[i][j]));
        if gj.gauss.v.len() != n {
            return Err(StargenError::DimensionMismatch { expected: n, got: gj.gauss.v.len() });
        }
        let vv = CVec::from_iterator(n, gj.gauss.v.iter().map(|p| unpair(*p)));
        let prefactor = PolySymbol::new(gj.config, poly)?;
        // Keep the stored matrix verbatim so that re-import is exact.
        let g = Self::new(prefactor, m.clone(), vv, unpair(gj.gauss.c))?;
        Ok(Self { m, ..g })
    }
}

/// Polynomial `zᵀMz + vᵀz + c`.
pub fn quadratic_poly(m: &CMat, v: &CVec, c: C64) -> Poly {
    let n = v.len();
    let mut p = Poly::constant(n, c);
    for i in 0..n {
        let mut e = vec![0; n];
        e[i] = 1;
        p.add_term(e, v[i]);
        for j in i..n {
            let mut e = vec![0; n];
            e[i] += 1;
            e[j] += 1;
            let coef = if i == j { m[(i, i)] } else { m[(i, j)] + m[(j, i)] };
            p.add_term(e, coef);
        }
    }
    p
}

/// Splits a polynomial of degree ≤ 2 into `(M, v, c)`.
pub fn quadratic_parts(p: &Poly) -> Result<(CMat, CVec, C64)> {
    let n = p.nvars();
    if p.degree() > 2 {
        return Err(StargenError::Unsupported(format!("expected degree ≤ 2, got {}", p.degree())));
    }
    let mut m = CMat::zeros(n, n);
    let mut v = CVec::zeros(n);
    let mut c = C64::new(0.0, 0.0);
    for (e, coef) in p.terms() {
        let idx: Vec<usize> = e.iter().enumerate().flat_map(|(i, &k)| std::iter::repeat_n(i, k as usize)).collect();
        match idx.as_slice() {
            [] => c = *coef,
            [i] => v[*i] = *coef,
            [i, j] if i == j => m[(*i, *i)] = *coef,
            [i, j] => {
                m[(*i, *j)] = coef * 0.5;
                m[(*j, *i)] = coef * 0.5;
            }
            _ => unreachable!(),
        }
    }
    Ok((m, v, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ho_ground(cfg: PhaseConfig) -> GaussSymbol {
        // 2 e^{-2H} with H = (p² + q²)/2
        let m = CMat::from_diagonal_element(2, 2, C64::new(-1.0, 0.0));
        GaussSymbol::new(PolySymbol::constant(cfg, C64::new(2.0, 0.0)), m, CVec::zeros(2), C64::new(0.0, 0.0)).unwrap()
    }

    #[test]
    fn evaluates_ground_state() {
        let g = ho_ground(PhaseConfig::unit(1)).scale(C64::new(0.5 / std::f64::consts::PI, 0.0));
        let v = g.eval(&[0.0, 1.0]).unwrap();
        assert!((v.re - (-1.0f64).exp() / std::f64::consts::PI).abs() < 1e-15);
        assert!(g.eval(&[0.0]).is_err());
    }

    #[test]
    fn quadratic_round_trip() {
        let cfg = PhaseConfig::unit(1);
        let g = GaussSymbol::pure(
            cfg,
            CMat::from_row_slice(
                2,
                2,
                &[C64::new(-1.0, 0.2), C64::new(0.3, 0.0), C64::new(0.3, 0.0), C64::new(-0.5, 0.0)],
            ),
            CVec::from_vec(vec![C64::new(0.1, 0.0), C64::new(0.0, -0.4)]),
            C64::new(0.7, 0.0),
        )
        .unwrap();
        let (m, v, c) = quadratic_parts(&g.exponent_poly()).unwrap();
        assert!(max_abs(&(m - &g.m)) < 1e-15);
        assert!(max_abs_vec(&(v - &g.v)) < 1e-15);
        assert_eq!(c, g.c);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let cfg = PhaseConfig::unit(1);
        let g = ho_ground(cfg).mul_poly(&Poly::var(2, 1).add(&Poly::var(2, 0).pow(2)));
        let d = g.derivative(1);
        let z = [0.3, -0.4];
        let h = 1e-5;
        let fd = (g.eval(&[z[0], z[1] + h]).unwrap() - g.eval(&[z[0], z[1] - h]).unwrap()) / (2.0 * h);
        assert!((d.eval(&z).unwrap() - fd).norm() < 1e-9);
    }

    #[test]
    fn affine_composition_is_pointwise() {
        let cfg = PhaseConfig::unit(1);
        let g = ho_ground(cfg).mul_poly(&Poly::var(2, 0));
        let f = CMat::from_row_slice(
            2,
            2,
            &[C64::new(0.5, 0.0), C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.2, 0.0)],
        );
        let d = CVec::from_vec(vec![C64::new(0.1, 0.0), C64::new(-0.3, 0.0)]);
        let h = g.compose_affine(&f, &d);
        let z = [0.7, 0.2];
        let w = [0.5 * z[0] + z[1] + 0.1, -z[0] + 0.2 * z[1] - 0.3];
        assert!((h.eval(&z).unwrap() - g.eval(&w).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn add_rebases_constants() {
        let cfg = PhaseConfig::unit(1);
        let g = ho_ground(cfg);
        let mut h = g.clone();
        h.c = C64::new(1.0, 0.0);
        let s = g.add(&h).unwrap();
        let z = [0.2, 0.1];
        assert!((s.eval(&z).unwrap() - g.eval(&z).unwrap() - h.eval(&z).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let cfg = PhaseConfig::unit(1);
        let g = ho_ground(cfg).scale(C64::new(1.0 / 3.0, 0.1)).mul_poly(&Poly::var(2, 0));
        let text = serde_json::to_string(&g.to_json()).unwrap();
        let back = GaussSymbol::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, g);
    }
}
