//! Star-exponentials of quadratic forms `𝒜 = zᵀAz + bᵀz + κ`.
//!
//! With `S_AᵀS_A = A` and `B = ħβ J S_A J S_Aᵀ J`,
//!
//! `e_*^{β𝒜} = (det cos B)^{-1/2} exp{ −(1/ħ)(z + ½A⁻¹b)ᵀ J S_A⁻¹ J tan B J S_A (z + ½A⁻¹b) − (β/4) bᵀA⁻¹b + βκ }`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::config::PhaseConfig;
use crate::error::{Result, StargenError};
use crate::linalg::{
    asymmetry, bilinear, cos_sin, eigen_decompose, eigenvalues, inverse, is_real, max_abs, symmetrize, symplectic_j,
    CMat, CVec,
};
use crate::symbols::{quadratic_parts, quadratic_poly, GaussSymbol, PolySymbol};

/// Pole threshold on `|det cos B|`.
pub const POLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    pub a: CMat,
    pub b: CVec,
    /// Constant term `κ`.
    pub constant: C64,
    pub config: PhaseConfig,
}

impl QuadraticForm {
    pub fn new(config: PhaseConfig, a: CMat, b: CVec) -> Result<Self> {
        let n = config.nvars();
        if a.nrows() != n || a.ncols() != n {
            return Err(StargenError::DimensionMismatch { expected: n, got: a.nrows() });
        }
        if b.len() != n {
            return Err(StargenError::DimensionMismatch { expected: n, got: b.len() });
        }
        if asymmetry(&a) > 1e-12 {
            return Err(StargenError::Unsupported("quadratic form matrix must be symmetric".into()));
        }
        Ok(Self { a: symmetrize(&a), b, constant: C64::new(0.0, 0.0), config })
    }

    pub fn with_constant(mut self, c: C64) -> Self {
        self.constant = c;
        self
    }

    /// Reads off `A`, `b`, `κ` from a symbol of degree at most two.
    pub fn from_symbol(s: &PolySymbol) -> Result<Self> {
        let (a, b, c) = quadratic_parts(&s.poly)?;
        Ok(Self::new(s.config, a, b)?.with_constant(c))
    }

    pub fn to_symbol(&self) -> PolySymbol {
        PolySymbol { config: self.config, poly: quadratic_poly(&self.a, &self.b, self.constant) }
    }

    pub fn eval(&self, z: &[f64]) -> C64 {
        let zc = CVec::from_iterator(z.len(), z.iter().map(|&x| C64::new(x, 0.0)));
        bilinear(&zc, &(&self.a * &zc)) + bilinear(&self.b, &zc) + self.constant
    }

    /// `A + λI`, the diagonal inflation used to regularize singular forms.
    pub fn regularized(&self, lambda: f64) -> Self {
        let n = self.a.nrows();
        let mut r = self.clone();
        r.a += CMat::identity(n, n) * C64::new(lambda, 0.0);
        r
    }

    /// `𝒜(F z + d)`.
    pub fn compose_affine(&self, f: &CMat, d: &CVec) -> Self {
        let a = symmetrize(&(f.transpose() * &self.a * f));
        let b = f.transpose() * (&self.a * d * C64::new(2.0, 0.0) + &self.b);
        let constant = self.constant + bilinear(d, &(&self.a * d)) + bilinear(&self.b, d);
        Self { a, b, constant, config: self.config }
    }

    pub fn inverse_a(&self) -> Result<CMat> {
        inverse(&self.a, "quadratic form matrix A")
    }

    pub fn is_real(&self) -> bool {
        is_real(&self.a, 0.0) && self.b.iter().all(|x| x.im == 0.0) && self.constant.im == 0.0
    }

    pub fn is_hermitian(&self) -> bool {
        max_abs(&(&self.a - self.a.adjoint())) <= 1e-12 * max_abs(&self.a).max(1e-300)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorMethod {
    Diagonalization,
    ComplexCholesky,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarFactorization {
    pub s: CMat,
    pub method: FactorMethod,
    /// `‖SᵀS − A‖_max`.
    pub residual: f64,
}

/// Finds `S` with `SᵀS = A`.
///
/// Diagonalization returns the symmetric principal square root
/// `S = V D^{1/2} Vᵀ` built from complex-orthonormal eigenvectors
/// (`VᵀV = I`); complex Cholesky returns an upper-triangular `S`.
pub fn factor_sa(qf: &QuadraticForm, method: FactorMethod) -> Result<StarFactorization> {
    let a = &qf.a;
    let s = match method {
        FactorMethod::Diagonalization => sqrt_symmetric(a)?,
        FactorMethod::ComplexCholesky => complex_cholesky(a)?,
    };
    let residual = max_abs(&(s.transpose() * &s - a));
    let scale = max_abs(a).max(f64::MIN_POSITIVE);
    if !(residual <= 1e-10 * scale) {
        return Err(StargenError::NotDiagonalizable(format!("factorization residual {residual:e} too large")));
    }
    Ok(StarFactorization { s, method, residual })
}

fn sqrt_symmetric(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    if is_real(a, 0.0) {
        let re = a.map(|x| x.re);
        let eig = nalgebra::SymmetricEigen::new(re);
        let v = eig.eigenvectors.map(|x| C64::new(x, 0.0));
        let d = CVec::from_iterator(n, eig.eigenvalues.iter().map(|&l| C64::new(l, 0.0).sqrt()));
        return Ok(symmetrize(&(&v * CMat::from_diagonal(&d) * v.transpose())));
    }
    let (vals, mut v) = eigen_decompose(a)?;
    let scale = max_abs(a).max(f64::MIN_POSITIVE);
    // Complex-orthonormalize (vᵀw = δ) inside clusters of equal eigenvalues.
    let mut done = vec![false; n];
    for i in 0..n {
        if done[i] {
            continue;
        }
        let cluster: Vec<usize> = (i..n).filter(|&k| !done[k] && (vals[k] - vals[i]).norm() <= 1e-8 * scale).collect();
        let mut basis: Vec<CVec> = Vec::new();
        for &k in &cluster {
            let mut x = v.column(k).into_owned();
            for u in &basis {
                let proj = bilinear(u, &x);
                x -= u * proj;
            }
            let nn = bilinear(&x, &x);
            if nn.norm() < 1e-10 * x.norm_squared().max(f64::MIN_POSITIVE) {
                return Err(StargenError::NotDiagonalizable("isotropic eigenvector (vᵀv = 0)".into()));
            }
            x /= nn.sqrt();
            v.set_column(k, &x);
            basis.push(x);
            done[k] = true;
        }
    }
    let d = CVec::from_iterator(n, vals.iter().map(|l| l.sqrt()));
    Ok(symmetrize(&(&v * CMat::from_diagonal(&d) * v.transpose())))
}

fn complex_cholesky(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let scale = max_abs(a).max(f64::MIN_POSITIVE);
    let mut u = CMat::zeros(n, n);
    for i in 0..n {
        let mut d = a[(i, i)];
        for k in 0..i {
            d -= u[(k, i)] * u[(k, i)];
        }
        if d.norm() <= 1e-14 * scale {
            return Err(StargenError::SingularMinor { index: i + 1 });
        }
        let uii = d.sqrt();
        u[(i, i)] = uii;
        for j in (i + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..i {
                s -= u[(k, i)] * u[(k, j)];
            }
            u[(i, j)] = s / uii;
        }
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScaleKind {
    RealAlpha,
    ImaginaryAlpha,
    /// Symplectic-proportional with an `α` that is neither real nor
    /// imaginary (possible only for non-hermitean `A`).
    ComplexAlpha,
    NotProportional,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticScale {
    pub kind: ScaleKind,
    pub alpha: C64,
    /// `γ` when `α = iγ`, else zero.
    pub gamma: f64,
    /// The factor `S_A` satisfying `S_A J S_Aᵀ = αJ`, when proportional.
    pub s: Option<CMat>,
}

impl SymplecticScale {
    pub fn is_proportional(&self) -> bool {
        self.kind != ScaleKind::NotProportional
    }
}

/// Classifies `A` by `AJA = α²J` and checks `S_A J S_Aᵀ = αJ`.
///
/// The sign of `α` is fixed so that `α > 0` (or `γ > 0`) by flipping
/// `S_A → diag(I, −I) S_A` when needed. If the supplied factor is not
/// symplectic-proportional, a diagonalization factor is tried before giving
/// up.
pub fn symplectic_scale(qf: &QuadraticForm, fact: &StarFactorization) -> Result<SymplecticScale> {
    let a = &qf.a;
    let scale = max_abs(a).max(f64::MIN_POSITIVE);
    if !(fact.residual <= 1e-10 * scale) {
        return Err(StargenError::InvalidConfig("factorization residual exceeds tolerance".into()));
    }
    let not_prop = SymplecticScale { kind: ScaleKind::NotProportional, alpha: C64::new(0.0, 0.0), gamma: 0.0, s: None };
    let n = qf.config.dim_n;
    let j = symplectic_j(n);
    let aja = a * &j * a;
    // (AJA)_{N,0} = α² J_{N,0} = α².
    let alpha2 = aja[(n, 0)];
    if max_abs(&(&aja - &j * alpha2)) > 1e-9 * alpha2.norm().max(scale * scale * 1e-3) {
        return Ok(not_prop);
    }
    let candidates = [Some(fact.s.clone()), sqrt_symmetric(a).ok()];
    for s in candidates.into_iter().flatten() {
        let sjs = &s * &j * s.transpose();
        let alpha = sjs[(n, 0)];
        let dev = max_abs(&(&sjs - &j * alpha));
        if dev > 1e-9 * alpha.norm().max(1e-300) && alpha2.norm() > 0.0 {
            continue;
        }
        if alpha2.norm() == 0.0 && max_abs(&sjs) > 1e-9 * scale {
            continue;
        }
        let (mut alpha, mut s) = (alpha, s);
        let flip = if alpha.im.abs() <= 1e-12 * alpha.norm() {
            alpha.re < 0.0
        } else if alpha.re.abs() <= 1e-12 * alpha.norm() {
            alpha.im < 0.0
        } else {
            alpha.re < 0.0
        };
        if flip {
            let mut o = CMat::identity(2 * n, 2 * n);
            for i in n..2 * n {
                o[(i, i)] = C64::new(-1.0, 0.0);
            }
            s = o * s;
            alpha = -alpha;
        }
        let tol = 1e-9 * alpha.norm();
        let (kind, gamma) = if alpha.im.abs() <= tol {
            alpha = C64::new(alpha.re, 0.0);
            (ScaleKind::RealAlpha, 0.0)
        } else if alpha.re.abs() <= tol {
            alpha = C64::new(0.0, alpha.im);
            (ScaleKind::ImaginaryAlpha, alpha.im)
        } else {
            (ScaleKind::ComplexAlpha, 0.0)
        };
        return Ok(SymplecticScale { kind, alpha, gamma, s: Some(s) });
    }
    Ok(not_prop)
}

/// `(det cos B)^{-1/2}` on the branch continuous in `β` from `β = 0`.
///
/// `B` is linear in `β` and `J`-antisymmetric, so its eigenvalues come in
/// pairs `±μ_j β`; `det cos(tB) = Π_j cos²(tμ_j)` and the continuous square
/// root is `Π_j cos(μ_j)`. If pairing fails numerically, the branch is
/// tracked along `t ∈ [0, 1]` instead.
fn det_cos_inv_sqrt(b: &CMat, cos_b: &CMat) -> Result<C64> {
    let det = cos_b.clone().determinant();
    if det.norm() < POLE_TOL {
        return Err(StargenError::Pole { det_abs: det.norm() });
    }
    let mut vals = eigenvalues(b);
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.norm())).max(1e-300);
    let mut prod = C64::new(1.0, 0.0);
    let mut paired = true;
    while let Some(v) = vals.pop() {
        let (idx, dist) = vals
            .iter()
            .enumerate()
            .map(|(i, w)| (i, (w + v).norm()))
            .fold((usize::MAX, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        if idx == usize::MAX || dist > 1e-6 * scale.max(1.0) {
            paired = false;
            break;
        }
        vals.remove(idx);
        prod *= v.cos();
    }
    if paired && (prod * prod - det).norm() <= 1e-8 * det.norm().max(1e-300) {
        return Ok(C64::new(1.0, 0.0) / prod);
    }
    // Track the square root of det cos(tB) along the ray.
    let steps = 256;
    let mut root = C64::new(1.0, 0.0);
    for k in 1..=steps {
        let t = k as f64 / steps as f64;
        let (ct, _) = cos_sin(&(b * C64::new(t, 0.0)));
        let d = ct.determinant();
        let r = d.sqrt();
        root = if (r - root).norm() <= (r + root).norm() { r } else { -r };
    }
    Ok(C64::new(1.0, 0.0) / root)
}

/// Closed-form star-exponential `e_*^{β𝒜}` of a nonsingular quadratic form.
pub fn star_exp_quadratic(qf: &QuadraticForm, beta: C64) -> Result<GaussSymbol> {
    let cfg = qf.config;
    if beta == C64::new(0.0, 0.0) {
        return Ok(GaussSymbol::from_poly(PolySymbol::one(cfg)));
    }
    let a_inv = qf.inverse_a()?;
    let fact =
        factor_sa(qf, FactorMethod::Diagonalization).or_else(|_| factor_sa(qf, FactorMethod::ComplexCholesky))?;
    star_exp_with_factor(qf, &fact.s, &a_inv, beta)
}

/// Same as [`star_exp_quadratic`] with a caller-chosen `S_A`.
pub fn star_exp_quadratic_with(qf: &QuadraticForm, fact: &StarFactorization, beta: C64) -> Result<GaussSymbol> {
    let a_inv = qf.inverse_a()?;
    star_exp_with_factor(qf, &fact.s, &a_inv, beta)
}

fn star_exp_with_factor(qf: &QuadraticForm, s: &CMat, a_inv: &CMat, beta: C64) -> Result<GaussSymbol> {
    let cfg = qf.config;
    let hbar = cfg.hbar;
    let j = symplectic_j(cfg.dim_n);
    let s_inv = inverse(s, "S_A")?;
    let b_mat = &j * s * &j * s.transpose() * &j * (beta * hbar);
    let (cos_b, sin_b) = cos_sin(&b_mat);
    let pref = det_cos_inv_sqrt(&b_mat, &cos_b)?;
    let cos_inv = inverse(&cos_b, "cos B")?;
    let tan_b = sin_b * cos_inv;
    let lambda_raw = -(&j * &s_inv * &j * tan_b * &j * s) / C64::new(hbar, 0.0);
    if asymmetry(&lambda_raw) > 1e-9 {
        return Err(StargenError::Unsupported(format!("exponent matrix lost symmetry ({:e})", asymmetry(&lambda_raw))));
    }
    let lambda = symmetrize(&lambda_raw);
    let w0 = a_inv * &qf.b * C64::new(0.5, 0.0);
    let v = &lambda * &w0 * C64::new(2.0, 0.0);
    let c = bilinear(&w0, &(&lambda * &w0)) - beta / 4.0 * bilinear(&qf.b, &(a_inv * &qf.b)) + beta * qf.constant;
    GaussSymbol::new(PolySymbol::constant(cfg, pref), lambda, v, c)
}

/// `tan x − x`, accurate for small `|x|`.
fn tan_minus_x(x: C64) -> C64 {
    if x.norm() < 0.05 {
        // x³/3 + 2x⁵/15 + 17x⁷/315 + 62x⁹/2835 + 1382x¹¹/155925 + 21844x¹³/6081075 + 929569x¹⁵/638512875
        let c = [
            1.0 / 3.0,
            2.0 / 15.0,
            17.0 / 315.0,
            62.0 / 2835.0,
            1382.0 / 155_925.0,
            21_844.0 / 6_081_075.0,
            929_569.0 / 638_512_875.0,
        ];
        let x2 = x * x;
        let mut acc = C64::new(0.0, 0.0);
        for ck in c.iter().rev() {
            acc = acc * x2 + ck;
        }
        acc * x2 * x
    } else {
        x.tan() - x
    }
}

/// `e_*^{β𝒜}` for symplectic-proportional `A`:
/// `[cos(iħαβ)]^{−N} exp{𝒜 tan(iħαβ)/(iħα) + bᵀA⁻¹b [tan(iħαβ) − iħαβ]/(4iħα)}`
/// with `A⁻¹ = −JAJ/α²`.
pub fn star_exp_symplectic(qf: &QuadraticForm, scale: &SymplecticScale, beta: C64) -> Result<GaussSymbol> {
    if !scale.is_proportional() {
        return Err(StargenError::NotProportional);
    }
    let alpha = scale.alpha;
    if alpha.norm() <= 1e-300 || alpha.norm() <= 1e-14 * max_abs(&qf.a) {
        return Err(StargenError::AlphaZero);
    }
    let cfg = qf.config;
    let n = cfg.dim_n;
    let ih = C64::new(0.0, cfg.hbar);
    let x = ih * alpha * beta;
    let cx = x.cos();
    let det = cx.powu(2 * n as u32);
    if det.norm() < POLE_TOL {
        return Err(StargenError::Pole { det_abs: det.norm() });
    }
    let j = symplectic_j(n);
    let a_inv = -(&j * &qf.a * &j) / (alpha * alpha);
    let btab = bilinear(&qf.b, &(&a_inv * &qf.b));
    let t = x.tan() / (ih * alpha);
    let m = &qf.a * t;
    let v = &qf.b * t;
    let c = btab * tan_minus_x(x) / (ih * alpha * 4.0) + beta * qf.constant;
    let pref = C64::new(1.0, 0.0) / cx.powu(n as u32);
    GaussSymbol::new(PolySymbol::constant(cfg, pref), m, v, c)
}
