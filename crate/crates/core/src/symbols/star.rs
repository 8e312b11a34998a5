//! Moyal star products.
//!
//! With a polynomial factor the bidifferential series
//! `Σ_s (iħ/2)^s / s! · a (←∂ᵀ J →∂)^s b` terminates at the degree of the
//! polynomial, so every product here is exact up to rounding.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use super::airy::AirySymbol;
use super::gauss::GaussSymbol;
use super::poly::{Poly, PolySymbol};
use crate::config::PhaseConfig;
use crate::error::{Result, StargenError};
use crate::linalg::{eigenvalues, max_abs, symmetrize, CMat, CVec};

/// Default cap on the number of star-exponential series terms.
pub const SERIES_CAP: usize = 64;

/// Symbol classes closed under differentiation and polynomial
/// multiplication, which is all a polynomial star product needs.
pub trait StarOperand: Clone {
    fn phase_config(&self) -> &PhaseConfig;
    fn derivative(&self, var: usize) -> Self;
    fn mul_poly(&self, p: &Poly) -> Self;
    /// `self + s·other`; operands must share their non-polynomial part.
    fn add_scaled(&self, other: &Self, s: C64) -> Self;
    fn zero_like(&self) -> Self;
    fn prune(&mut self);
}

impl StarOperand for PolySymbol {
    fn phase_config(&self) -> &PhaseConfig {
        &self.config
    }
    fn derivative(&self, var: usize) -> Self {
        PolySymbol::derivative(self, var)
    }
    fn mul_poly(&self, p: &Poly) -> Self {
        PolySymbol { config: self.config, poly: self.poly.mul(p) }
    }
    fn add_scaled(&self, other: &Self, s: C64) -> Self {
        self.add(&other.scale(s))
    }
    fn zero_like(&self) -> Self {
        PolySymbol::zero(self.config)
    }
    fn prune(&mut self) {
        self.poly.prune();
    }
}

impl StarOperand for GaussSymbol {
    fn phase_config(&self) -> &PhaseConfig {
        self.config()
    }
    fn derivative(&self, var: usize) -> Self {
        GaussSymbol::derivative(self, var)
    }
    fn mul_poly(&self, p: &Poly) -> Self {
        GaussSymbol::mul_poly(self, p)
    }
    fn add_scaled(&self, other: &Self, s: C64) -> Self {
        self.add(&other.scale(s)).expect("operands share an exponent")
    }
    fn zero_like(&self) -> Self {
        self.with_prefactor(PolySymbol::zero(*self.config()))
    }
    fn prune(&mut self) {
        self.prefactor.poly.prune();
    }
}

impl StarOperand for AirySymbol {
    fn phase_config(&self) -> &PhaseConfig {
        &self.config
    }
    fn derivative(&self, var: usize) -> Self {
        AirySymbol::derivative(self, var)
    }
    fn mul_poly(&self, p: &Poly) -> Self {
        AirySymbol::mul_poly(self, p)
    }
    fn add_scaled(&self, other: &Self, s: C64) -> Self {
        self.add(&other.scale(s))
    }
    fn zero_like(&self) -> Self {
        self.scale(C64::new(0.0, 0.0))
    }
    fn prune(&mut self) {
        let cut = 1e-14 * self.ai.max_coeff().max(self.aip.max_coeff());
        self.ai.prune_abs(cut);
        self.aip.prune_abs(cut);
    }
}

fn check_compatible(a: &PhaseConfig, b: &PhaseConfig) -> Result<()> {
    if a.nvars() != b.nvars() {
        return Err(StargenError::DimensionMismatch { expected: a.nvars(), got: b.nvars() });
    }
    if a.hbar != b.hbar {
        return Err(StargenError::InvalidConfig(format!("hbar mismatch: {} vs {}", a.hbar, b.hbar)));
    }
    Ok(())
}

/// One term of the bidifferential expansion.
struct BidiffTerm {
    order: usize,
    coeff: C64,
    left: Vec<u32>,
    right: Vec<u32>,
}

/// Enumerates `(∂^left a)(∂^right b)` terms with their `(iħ/2)^s`
/// weights. `left_bound[k]`/`right_bound[k]` cap the derivative order in
/// variable `k` on each side; `max_order` caps `s`.
fn bidiff_terms(n: usize, hbar: f64, left_bound: &[u32], right_bound: &[u32], max_order: u32) -> Vec<BidiffTerm> {
    // Pair type (i,+): ∂q_i on the left, ∂p_i on the right, sign +1.
    // Pair type (i,-): ∂p_i on the left, ∂q_i on the right, sign -1.
    let mut out = Vec::new();
    let mut mu = vec![0u32; 2 * n];
    fn rec(
        k: usize,
        n: usize,
        hbar: f64,
        left_bound: &[u32],
        right_bound: &[u32],
        remaining: u32,
        mu: &mut Vec<u32>,
        out: &mut Vec<BidiffTerm>,
    ) {
        if k == 2 * n {
            let mut left = vec![0u32; 2 * n];
            let mut right = vec![0u32; 2 * n];
            let mut coeff = 1.0;
            let mut order = 0usize;
            for i in 0..n {
                let (plus, minus) = (mu[2 * i], mu[2 * i + 1]);
                left[n + i] += plus;
                right[i] += plus;
                left[i] += minus;
                right[n + i] += minus;
                coeff /= factorial(plus) * factorial(minus);
                if minus % 2 == 1 {
                    coeff = -coeff;
                }
                order += (plus + minus) as usize;
            }
            let c = C64::new(0.0, hbar / 2.0).powu(order as u32) * coeff;
            out.push(BidiffTerm { order, coeff: c, left, right });
            return;
        }
        let i = k / 2;
        let (lvar, rvar) = if k.is_multiple_of(2) { (n + i, i) } else { (i, n + i) };
        let cap = left_bound[lvar].min(right_bound[rvar]).min(remaining);
        for m in 0..=cap {
            mu[k] = m;
            rec(k + 1, n, hbar, left_bound, right_bound, remaining - m, mu, out);
        }
        mu[k] = 0;
    }
    rec(0, n, hbar, left_bound, right_bound, max_order, &mut mu, &mut out);
    out
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

/// Memoized mixed derivatives of a star operand.
struct DerivCache<'a, S: StarOperand> {
    base: &'a S,
    cache: BTreeMap<Vec<u32>, S>,
}

impl<'a, S: StarOperand> DerivCache<'a, S> {
    fn new(base: &'a S) -> Self {
        Self { base, cache: BTreeMap::new() }
    }

    fn get(&mut self, orders: &[u32]) -> S {
        if orders.iter().all(|&o| o == 0) {
            return self.base.clone();
        }
        if let Some(s) = self.cache.get(orders) {
            return s.clone();
        }
        let j = orders.iter().position(|&o| o > 0).unwrap();
        let mut lower = orders.to_vec();
        lower[j] -= 1;
        let d = self.get(&lower).derivative(j);
        self.cache.insert(orders.to_vec(), d.clone());
        d
    }
}

/// Terms of `a ⋆ b` grouped by ħ-order; `poly_left` says which factor is the
/// polynomial `a` (the other one is the generic operand).
fn star_orders<S: StarOperand>(a: &PolySymbol, b: &S, poly_left: bool) -> Result<Vec<S>> {
    check_compatible(&a.config, b.phase_config())?;
    let n = a.config.dim_n;
    let nv = 2 * n;
    let hbar = a.config.hbar;
    let deg = a.poly.degree();
    let poly_bound: Vec<u32> = (0..nv).map(|k| a.poly.degree_in(k)).collect();
    let open = vec![u32::MAX; nv];
    let terms = if poly_left {
        bidiff_terms(n, hbar, &poly_bound, &open, deg)
    } else {
        bidiff_terms(n, hbar, &open, &poly_bound, deg)
    };
    let mut cache = DerivCache::new(b);
    let mut orders: Vec<S> = vec![b.zero_like(); deg as usize + 1];
    for t in terms {
        let (pd, sd) = if poly_left { (&t.left, &t.right) } else { (&t.right, &t.left) };
        let da = a.poly.derivative_multi(pd);
        if da.is_zero() {
            continue;
        }
        let db = cache.get(sd);
        let contrib = db.mul_poly(&da);
        orders[t.order] = orders[t.order].add_scaled(&contrib, t.coeff);
    }
    for o in &mut orders {
        o.prune();
    }
    Ok(orders)
}

fn sum_orders<S: StarOperand>(orders: Vec<S>) -> S {
    let mut it = orders.into_iter();
    let mut acc = it.next().expect("at least one order");
    for o in it {
        acc = acc.add_scaled(&o, C64::new(1.0, 0.0));
    }
    acc.prune();
    acc
}

/// `a ⋆ b` with polynomial `a`.
pub fn star_poly<S: StarOperand>(a: &PolySymbol, b: &S) -> Result<S> {
    Ok(sum_orders(star_orders(a, b, true)?))
}

/// `b ⋆ a` with polynomial `a`.
pub fn star_poly_right<S: StarOperand>(b: &S, a: &PolySymbol) -> Result<S> {
    Ok(sum_orders(star_orders(a, b, false)?))
}

/// The ħ-orders `s = 0..=deg(a)` of `a ⋆ b`, each including its
/// `(iħ/2)^s/s!` weight.
pub fn star_poly_orders(a: &PolySymbol, b: &PolySymbol) -> Result<Vec<PolySymbol>> {
    star_orders(a, b, true)
}

/// `(a ⋆ b − b ⋆ a)/(iħ)`.
pub fn moyal_bracket<S: StarOperand>(a: &PolySymbol, b: &S) -> Result<S> {
    let ab = star_poly(a, b)?;
    let ba = star_poly_right(b, a)?;
    let s = C64::new(0.0, -1.0 / a.config.hbar);
    let mut r = ab.add_scaled(&ba, C64::new(-1.0, 0.0));
    r = r.zero_like().add_scaled(&r, s);
    Ok(r)
}

/// Truncated series `Σ_{n ≤ n_terms} βⁿ/n! Ωₙ` with `Ω_{n+1} = a ⋆ Ωₙ`.
pub fn star_exp_series(a: &PolySymbol, beta: C64, n_terms: usize) -> Result<PolySymbol> {
    star_exp_series_capped(a, beta, n_terms, SERIES_CAP)
}

pub fn star_exp_series_capped(a: &PolySymbol, beta: C64, n_terms: usize, cap: usize) -> Result<PolySymbol> {
    if n_terms > cap {
        return Err(StargenError::SeriesCap { requested: n_terms, cap });
    }
    let one = PolySymbol::one(a.config);
    let mut omega = one.clone();
    let mut sum = one;
    let mut weight = C64::new(1.0, 0.0);
    for n in 1..=n_terms {
        omega = star_poly(a, &omega)?;
        weight = weight * beta / n as f64;
        let term = omega.scale(weight);
        if term.poly.terms().values().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(StargenError::SeriesOverflow { term: n });
        }
        sum = sum.add(&term);
    }
    Ok(sum)
}

/// Closed-form Moyal product of two Gaussian symbols.
///
/// Writes `f(x) g(y)` as a Gaussian in `w = (x, y)` with a source `σ`,
/// applies `exp((iħ/2) ∂_xᵀ J ∂_y)` exactly (a Gaussian heat-kernel step),
/// restricts to `x = y = z`, and generates the polynomial prefactors by
/// differentiating with respect to the source at `σ = 0`.
pub fn star_gauss(f: &GaussSymbol, g: &GaussSymbol) -> Result<GaussSymbol> {
    check_compatible(f.config(), g.config())?;
    let cfg = *f.config();
    let n = cfg.nvars();
    let d = 2 * n;
    let hbar = cfg.hbar;
    let j = crate::linalg::symplectic_j(cfg.dim_n);

    let mut p = CMat::zeros(d, d);
    p.view_mut((0, 0), (n, n)).copy_from(&(f.m.clone() * C64::new(2.0, 0.0)));
    p.view_mut((n, n), (n, n)).copy_from(&(g.m.clone() * C64::new(2.0, 0.0)));
    let mut gm = CMat::zeros(d, d);
    let h = C64::new(0.0, hbar / 2.0);
    gm.view_mut((0, n), (n, n)).copy_from(&(j.clone() * h));
    gm.view_mut((n, 0), (n, n)).copy_from(&(-j * h));
    let mut u = CVec::zeros(d);
    u.rows_mut(0, n).copy_from(&f.v);
    u.rows_mut(n, n).copy_from(&g.v);

    let id = CMat::identity(d, d);
    let ipg = &id - &p * &gm;
    let w = ipg.clone().try_inverse().ok_or_else(|| StargenError::DegenerateProduct("I - P G is singular".into()))?;
    let cond = crate::linalg::one_norm(&ipg) * crate::linalg::one_norm(&w);
    if !cond.is_finite() || cond > 1e13 {
        return Err(StargenError::DegenerateProduct(format!("kernel condition number {cond:e}")));
    }
    // det(I - PG)^{-1/2} as a product of principal roots: the straight
    // path t ↦ I - tPG keeps each factor off the branch cut.
    let mut pref = C64::new(1.0, 0.0);
    for lam in eigenvalues(&(&p * &gm)) {
        let one_minus = C64::new(1.0, 0.0) - lam;
        if one_minus.norm() < 1e-14 {
            return Err(StargenError::DegenerateProduct("vanishing determinant".into()));
        }
        pref /= one_minus.sqrt();
    }

    let p1 = symmetrize(&(&p * &inverse_i_minus_gp(&gm, &p)?));
    let mut e = CMat::zeros(d, n);
    for i in 0..n {
        e[(i, i)] = C64::new(1.0, 0.0);
        e[(n + i, i)] = C64::new(1.0, 0.0);
    }
    let half = C64::new(0.5, 0.0);
    let m_zz = symmetrize(&(e.transpose() * &p1 * &e)) * half;
    let gw = symmetrize(&(&gm * &w));
    let v_z = e.transpose() * &w * &u;
    let const_part = (u.transpose() * &gw * &u)[(0, 0)] * half + f.c + g.c;

    let fp = &f.prefactor.poly;
    let gp = &g.prefactor.poly;
    let prefactor_poly = if fp.degree() == 0 && gp.degree() == 0 {
        Poly::constant(n, fp.coeff(&vec![0; n]) * gp.coeff(&vec![0; n]))
    } else {
        // Exponent over ξ = (z, σ) with σ dual to w.
        let dim = n + d;
        let mut big_m = CMat::zeros(dim, dim);
        big_m.view_mut((0, 0), (n, n)).copy_from(&m_zz);
        let cross = e.transpose() * &w * half;
        big_m.view_mut((0, n), (n, d)).copy_from(&cross);
        big_m.view_mut((n, 0), (d, n)).copy_from(&cross.transpose());
        big_m.view_mut((n, n), (d, d)).copy_from(&(&gw * half));
        let mut big_v = CVec::zeros(dim);
        big_v.rows_mut(0, n).copy_from(&v_z);
        big_v.rows_mut(n, d).copy_from(&(&gw * &u));
        let grads: Vec<Poly> = (0..dim)
            .map(|k| {
                let wv: Vec<C64> = (0..dim).map(|l| big_m[(k, l)] * 2.0).collect();
                Poly::linear(&wv, big_v[k])
            })
            .collect();
        let mut cache: BTreeMap<Vec<u32>, Poly> = BTreeMap::new();
        let mut total = Poly::zero(n);
        for (ea, ca) in fp.terms() {
            for (eb, cb) in gp.terms() {
                let mut orders = vec![0u32; dim];
                orders[n..n + n].copy_from_slice(ea);
                orders[n + n..].copy_from_slice(eb);
                let dpoly = source_derivative(&orders, dim, &grads, &mut cache);
                total = total.add(&dpoly.restrict_vars(n).scale(ca * cb));
            }
        }
        total.prune();
        total
    };
    let prefactor = PolySymbol { config: cfg, poly: prefactor_poly.scale(pref) };
    GaussSymbol::new(prefactor, m_zz, v_z, const_part)
}

/// `(I - G P)^{-1}`.
fn inverse_i_minus_gp(gm: &CMat, p: &CMat) -> Result<CMat> {
    let d = gm.nrows();
    let m = CMat::identity(d, d) - gm * p;
    let inv = m.try_inverse().ok_or_else(|| StargenError::DegenerateProduct("I - G P is singular".into()))?;
    if !inv.iter().all(|x| x.re.is_finite() && x.im.is_finite()) || max_abs(&inv) > 1e15 {
        return Err(StargenError::DegenerateProduct("I - G P is ill-conditioned".into()));
    }
    Ok(inv)
}

/// Prefactor of `∂^orders exp(ξᵀMξ + Vᵀξ)` divided by the exponential.
fn source_derivative(orders: &[u32], dim: usize, grads: &[Poly], cache: &mut BTreeMap<Vec<u32>, Poly>) -> Poly {
    if orders.iter().all(|&o| o == 0) {
        return Poly::one(dim);
    }
    if let Some(p) = cache.get(orders) {
        return p.clone();
    }
    let j = orders.iter().position(|&o| o > 0).unwrap();
    let mut lower = orders.to_vec();
    lower[j] -= 1;
    let prev = source_derivative(&lower, dim, grads, cache);
    let next = prev.derivative(j).add(&prev.mul(&grads[j]));
    cache.insert(orders.to_vec(), next.clone());
    next
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PhaseConfig {
        PhaseConfig::unit(1)
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ho(cfg: PhaseConfig) -> PolySymbol {
        let p = PolySymbol::p(cfg, 0);
        let q = PolySymbol::q(cfg, 0);
        p.mul(&p).add(&q.mul(&q)).scale_re(0.5)
    }

    #[test]
    fn canonical_pair() {
        let q = PolySymbol::q(cfg(), 0);
        let p = PolySymbol::p(cfg(), 0);
        let qp = star_poly(&q, &p).unwrap();
        let expect = q.mul(&p).add_const(c(0.0, 0.5));
        assert!(qp.max_diff(&expect) < 1e-15);
        let br = moyal_bracket(&q, &p).unwrap();
        assert!(br.max_diff(&PolySymbol::one(cfg())) < 1e-15);
    }

    #[test]
    fn ho_square() {
        let h = ho(cfg());
        let hh = star_poly(&h, &h).unwrap();
        let expect = h.mul(&h).add_const(c(-0.25, 0.0));
        assert!(hh.max_diff(&expect) < 1e-14);
    }

    #[test]
    fn identity_element() {
        let h = ho(cfg());
        let one = PolySymbol::one(cfg());
        assert!(star_poly(&one, &h).unwrap().max_diff(&h) < 1e-15);
        assert!(star_poly_right(&h, &one).unwrap().max_diff(&h) < 1e-15);
    }

    #[test]
    fn bracket_with_hamiltonian_is_poisson() {
        let h = ho(cfg());
        let q = PolySymbol::q(cfg(), 0);
        let p = PolySymbol::p(cfg(), 0);
        assert!(moyal_bracket(&q, &h).unwrap().max_diff(&p) < 1e-15);
        assert!(moyal_bracket(&h, &h).unwrap().poly.is_zero());
    }

    #[test]
    fn right_product_matches_reversed_left() {
        let q = PolySymbol::q(cfg(), 0);
        let p = PolySymbol::p(cfg(), 0);
        let a = q.mul(&q).mul(&p).add(&p.scale(c(0.0, 2.0)));
        let b = p.mul(&p).mul(&q).add(&q);
        let l = star_poly(&a, &b).unwrap();
        let r = star_poly_right(&a, &b).unwrap();
        assert!(l.max_diff(&r) < 1e-14);
    }

    #[test]
    fn series_of_linear_symbol_is_ordinary_exponential() {
        let q = PolySymbol::q(cfg(), 0);
        let s = star_exp_series(&q, c(0.3, 0.0), 25).unwrap();
        let v = s.eval(&[0.0, 0.7]).unwrap();
        assert!((v.re - (0.21f64).exp()).abs() < 1e-14);
        assert!(star_exp_series(&q, c(0.3, 0.0), 65).is_err());
        let zero = star_exp_series(&q, c(0.0, 0.0), 10).unwrap();
        assert!(zero.max_diff(&PolySymbol::one(cfg())) < 1e-15);
    }

    #[test]
    fn series_overflow_reports_term() {
        let q = PolySymbol::q(cfg(), 0).scale_re(1e300);
        match star_exp_series(&q.mul(&q), c(1e10, 0.0), 10) {
            Err(StargenError::SeriesOverflow { term }) => assert!(term >= 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gaussian_identity_product() {
        let g = GaussSymbol::pure(
            cfg(),
            CMat::from_row_slice(2, 2, &[c(-1.0, 0.0), c(0.2, 0.0), c(0.2, 0.0), c(-0.5, 0.1)]),
            CVec::from_vec(vec![c(0.1, 0.0), c(0.0, 0.3)]),
            c(0.0, 0.0),
        )
        .unwrap()
        .mul_poly(&Poly::var(2, 0));
        let one = GaussSymbol::from_poly(PolySymbol::one(cfg()));
        let l = star_gauss(&one, &g).unwrap();
        let r = star_gauss(&g, &one).unwrap();
        for z in [[0.1, 0.2], [-0.7, 0.4]] {
            assert!((l.eval(&z).unwrap() - g.eval(&z).unwrap()).norm() < 1e-13);
            assert!((r.eval(&z).unwrap() - g.eval(&z).unwrap()).norm() < 1e-13);
        }
    }

    #[test]
    fn ground_projector_is_idempotent() {
        let g = GaussSymbol::new(
            PolySymbol::constant(cfg(), c(2.0, 0.0)),
            CMat::from_diagonal_element(2, 2, c(-1.0, 0.0)),
            CVec::zeros(2),
            c(0.0, 0.0),
        )
        .unwrap();
        let gg = star_gauss(&g, &g).unwrap();
        for z in [[0.0, 0.0], [0.3, -1.2], [1.5, 0.5]] {
            assert!((gg.eval(&z).unwrap() - g.eval(&z).unwrap()).norm() < 1e-14);
        }
    }

    #[test]
    fn gaussian_product_agrees_with_polynomial_product() {
        let q = PolySymbol::q(cfg(), 0);
        let p = PolySymbol::p(cfg(), 0);
        let a = q.mul(&p).add(&p.mul(&p).scale(c(0.5, 0.2)));
        let g = GaussSymbol::pure(
            cfg(),
            CMat::from_row_slice(2, 2, &[c(-0.8, 0.1), c(0.1, 0.0), c(0.1, 0.0), c(-0.6, 0.0)]),
            CVec::from_vec(vec![c(0.2, 0.0), c(0.0, -0.1)]),
            c(0.1, 0.0),
        )
        .unwrap()
        .mul_poly(&q.poly);
        let via_poly = star_poly(&a, &g).unwrap();
        let via_gauss = star_gauss(&GaussSymbol::from_poly(a.clone()), &g).unwrap();
        let via_poly_r = star_poly_right(&g, &a).unwrap();
        let via_gauss_r = star_gauss(&g, &GaussSymbol::from_poly(a)).unwrap();
        for i in 0..11 {
            for k in 0..11 {
                let z = [-1.0 + 0.2 * i as f64, -1.0 + 0.2 * k as f64];
                assert!((via_poly.eval(&z).unwrap() - via_gauss.eval(&z).unwrap()).norm() < 1e-12);
                assert!((via_poly_r.eval(&z).unwrap() - via_gauss_r.eval(&z).unwrap()).norm() < 1e-12);
            }
        }
    }
}
