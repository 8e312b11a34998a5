use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::config::PhaseConfig;
use crate::error::{Result, StargenError};

/// Relative magnitude below which product coefficients are dropped.
pub const PRUNE_REL: f64 = 1e-14;

/// Multivariate polynomial with complex coefficients.
///
/// Monomials are keyed by their exponent vectors; a `BTreeMap` keeps
/// iteration order (and therefore all derived output) deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, C64>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: C64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, C64::new(1.0, 0.0))
    }

    /// The coordinate `z_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, C64::new(1.0, 0.0))
    }

    pub fn monomial(powers: Vec<u32>, c: C64) -> Self {
        let mut p = Self::zero(powers.len());
        p.add_term(powers, c);
        p
    }

    /// Affine linear form `Σ w_i z_i + w0`.
    pub fn linear(w: &[C64], w0: C64) -> Self {
        let n = w.len();
        let mut p = Self::constant(n, w0);
        for (i, wi) in w.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            p.add_term(e, *wi);
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Vec<u32>, C64)>>(nvars: usize, it: I) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in it {
            assert_eq!(e.len(), nvars, "monomial arity mismatch");
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, C64> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, powers: &[u32]) -> C64 {
        self.terms.get(powers).copied().unwrap_or_default()
    }

    /// Adds `c · z^powers`, removing the entry if it cancels exactly.
    pub fn add_term(&mut self, powers: Vec<u32>, c: C64) {
        debug_assert_eq!(powers.len(), self.nvars);
        if c == C64::new(0.0, 0.0) {
            return;
        }
        match self.terms.get_mut(&powers) {
            Some(v) => {
                *v += c;
                if *v == C64::new(0.0, 0.0) {
                    self.terms.remove(&powers);
                }
            }
            None => {
                self.terms.insert(powers, c);
            }
        }
    }

    /// Total degree; `0` for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum::<u32>()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e[var]).max().unwrap_or(0)
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.norm()))
    }

    /// Drops coefficients below `PRUNE_REL` times the largest one.
    pub fn prune(&mut self) {
        self.prune_rel(PRUNE_REL);
    }

    pub fn prune_rel(&mut self, rel: f64) {
        let cut = rel * self.max_coeff();
        if cut.is_finite() {
            self.prune_abs(cut);
        }
    }

    pub fn prune_abs(&mut self, cut: f64) {
        // non-finite coefficients are kept so overflow stays visible
        self.terms.retain(|_, c| !(c.norm() <= cut));
    }

    fn check_arity(&self, other: &Poly) {
        assert_eq!(self.nvars, other.nvars, "polynomial arity mismatch");
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.check_arity(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Poly {
        if s == C64::new(0.0, 0.0) {
            return Poly::zero(self.nvars);
        }
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect() }
    }

    /// Ordinary (commutative) product, pruned.
    pub fn mul(&self, other: &Poly) -> Poly {
        self.check_arity(other);
        let mut out = Poly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *out.terms.entry(e).or_default() += c1 * c2;
            }
        }
        out.terms.retain(|_, c| *c != C64::new(0.0, 0.0));
        out.prune();
        out
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut out = Poly::one(self.nvars);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn conj(&self) -> Poly {
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), c.conj())).collect() }
    }

    pub fn derivative(&self, var: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] > 0 {
                let mut e2 = e.clone();
                e2[var] -= 1;
                out.terms.insert(e2, c * e[var] as f64);
            }
        }
        out
    }

    /// Mixed partial derivative `∂^orders`.
    pub fn derivative_multi(&self, orders: &[u32]) -> Poly {
        let mut out = Poly::zero(self.nvars);
        'terms: for (e, c) in &self.terms {
            let mut f = 1.0;
            let mut e2 = e.clone();
            for (k, &o) in orders.iter().enumerate() {
                if e[k] < o {
                    continue 'terms;
                }
                for j in 0..o {
                    f *= (e[k] - j) as f64;
                }
                e2[k] -= o;
            }
            out.terms.insert(e2, c * f);
        }
        out
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        assert_eq!(z.len(), self.nvars, "evaluation point arity mismatch");
        let mut pows: Vec<Vec<C64>> = Vec::with_capacity(self.nvars);
        for (i, zi) in z.iter().enumerate() {
            let d = self.degree_in(i) as usize;
            let mut v = Vec::with_capacity(d + 1);
            let mut acc = C64::new(1.0, 0.0);
            for _ in 0..=d {
                v.push(acc);
                acc *= zi;
            }
            pows.push(v);
        }
        self.terms.iter().map(|(e, c)| e.iter().enumerate().fold(*c, |acc, (i, &k)| acc * pows[i][k as usize])).sum()
    }

    pub fn eval_real(&self, z: &[f64]) -> C64 {
        let zc: Vec<C64> = z.iter().map(|&x| C64::new(x, 0.0)).collect();
        self.eval(&zc)
    }

    /// Substitutes `z_i ↦ images[i]`; the result lives in the images' ring.
    pub fn compose(&self, images: &[Poly]) -> Poly {
        assert_eq!(images.len(), self.nvars, "substitution arity mismatch");
        let target = images.first().map(|p| p.nvars).unwrap_or(0);
        let mut cache: Vec<Vec<Poly>> = images.iter().map(|p| vec![Poly::one(p.nvars), p.clone()]).collect();
        let mut out = Poly::zero(target);
        for (e, c) in &self.terms {
            let mut t = Poly::constant(target, *c);
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while cache[i].len() <= k as usize {
                    let next = cache[i].last().unwrap().mul(&images[i]);
                    cache[i].push(next);
                }
                t = t.mul(&cache[i][k as usize]);
            }
            for (e2, c2) in t.terms {
                *out.terms.entry(e2).or_default() += c2;
            }
        }
        out.terms.retain(|_, c| *c != C64::new(0.0, 0.0));
        out.prune();
        out
    }

    /// Substitutes `z ↦ F z + d` with `F` given row-major as `f[i][j]`.
    pub fn compose_affine(&self, f: &[Vec<C64>], d: &[C64]) -> Poly {
        let images: Vec<Poly> = (0..self.nvars).map(|i| Poly::linear(&f[i], d[i])).collect();
        self.compose(&images)
    }

    /// Re-embeds into a ring with more variables (new ones appended).
    pub fn extend_vars(&self, nvars: usize) -> Poly {
        assert!(nvars >= self.nvars);
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mut e2 = e.clone();
                e2.resize(nvars, 0);
                (e2, *c)
            })
            .collect();
        Poly { nvars, terms }
    }

    /// Keeps the first `nvars` variables and sets the rest to zero.
    pub fn restrict_vars(&self, nvars: usize) -> Poly {
        let mut out = Poly::zero(nvars);
        for (e, c) in &self.terms {
            if e[nvars..].iter().all(|&k| k == 0) {
                out.add_term(e[..nvars].to_vec(), *c);
            }
        }
        out
    }

    /// Largest coefficient difference against `other`.
    pub fn max_diff(&self, other: &Poly) -> f64 {
        self.sub(other).max_coeff()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }
}

/// A polynomial phase-space symbol over `z = (p_1..p_N, q_1..q_N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySymbol {
    pub config: PhaseConfig,
    pub poly: Poly,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct TermJson {
    pub powers: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

pub(crate) fn terms_to_json(p: &Poly) -> Vec<TermJson> {
    p.terms().iter().map(|(e, c)| TermJson { powers: e.clone(), re: c.re, im: c.im }).collect()
}

pub(crate) fn terms_from_json(nvars: usize, t: &[TermJson]) -> Result<Poly> {
    let mut p = Poly::zero(nvars);
    for term in t {
        if term.powers.len() != nvars {
            return Err(StargenError::DimensionMismatch { expected: nvars, got: term.powers.len() });
        }
        p.add_term(term.powers.clone(), C64::new(term.re, term.im));
    }
    Ok(p)
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    config: PhaseConfig,
    terms: Vec<TermJson>,
}

impl PolySymbol {
    pub fn new(config: PhaseConfig, poly: Poly) -> Result<Self> {
        if poly.nvars() != config.nvars() {
            return Err(StargenError::DimensionMismatch { expected: config.nvars(), got: poly.nvars() });
        }
        Ok(Self { config, poly })
    }

    pub fn zero(config: PhaseConfig) -> Self {
        Self { config, poly: Poly::zero(config.nvars()) }
    }

    pub fn constant(config: PhaseConfig, c: C64) -> Self {
        Self { config, poly: Poly::constant(config.nvars(), c) }
    }

    pub fn one(config: PhaseConfig) -> Self {
        Self::constant(config, C64::new(1.0, 0.0))
    }

    pub fn p(config: PhaseConfig, i: usize) -> Self {
        Self { config, poly: Poly::var(config.nvars(), config.p_index(i)) }
    }

    pub fn q(config: PhaseConfig, i: usize) -> Self {
        Self { config, poly: Poly::var(config.nvars(), config.q_index(i)) }
    }

    pub fn from_terms<I: IntoIterator<Item = (Vec<u32>, C64)>>(config: PhaseConfig, it: I) -> Result<Self> {
        let n = config.nvars();
        let mut poly = Poly::zero(n);
        for (e, c) in it {
            if e.len() != n {
                return Err(StargenError::DimensionMismatch { expected: n, got: e.len() });
            }
            poly.add_term(e, c);
        }
        Ok(Self { config, poly })
    }

    pub fn degree(&self) -> u32 {
        self.poly.degree()
    }

    pub fn eval(&self, z: &[f64]) -> Result<C64> {
        check_point(&self.config, z)?;
        Ok(self.poly.eval_real(z))
    }

    fn with(&self, poly: Poly) -> Self {
        Self { config: self.config, poly }
    }

    pub fn add(&self, o: &PolySymbol) -> Self {
        self.with(self.poly.add(&o.poly))
    }

    pub fn sub(&self, o: &PolySymbol) -> Self {
        self.with(self.poly.sub(&o.poly))
    }

    /// Pointwise (commutative) product.
    pub fn mul(&self, o: &PolySymbol) -> Self {
        self.with(self.poly.mul(&o.poly))
    }

    pub fn scale(&self, s: C64) -> Self {
        self.with(self.poly.scale(s))
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn add_const(&self, c: C64) -> Self {
        self.with(self.poly.add(&Poly::constant(self.poly.nvars(), c)))
    }

    pub fn pow(&self, k: u32) -> Self {
        self.with(self.poly.pow(k))
    }

    pub fn conj(&self) -> Self {
        self.with(self.poly.conj())
    }

    pub fn derivative(&self, var: usize) -> Self {
        self.with(self.poly.derivative(var))
    }

    /// `a(F z + d)`.
    pub fn compose_affine(&self, f: &[Vec<C64>], d: &[C64]) -> Self {
        self.with(self.poly.compose_affine(f, d))
    }

    pub fn max_diff(&self, o: &PolySymbol) -> f64 {
        self.poly.max_diff(&o.poly)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(PolyJson { config: self.config, terms: terms_to_json(&self.poly) })
            .expect("polynomial serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let pj: PolyJson = serde_json::from_value(v.clone())?;
        pj.config.validate()?;
        let poly = terms_from_json(pj.config.nvars(), &pj.terms)?;
        Self::new(pj.config, poly)
    }
}

pub(crate) fn check_point(config: &PhaseConfig, z: &[f64]) -> Result<()> {
    if z.len() != config.nvars() {
        return Err(StargenError::DimensionMismatch { expected: config.nvars(), got: z.len() });
    }
    Ok(())
}
