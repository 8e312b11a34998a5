//! Stargenfunctions of quadratic forms: discrete Laguerre atoms, continuous
//! kernels, non-diagonal elements built from ladder symbols or conjugate
//! generators.
//!
//! Atoms carry the unnormalized weights `C` with `∫C = (2πħ)^N`; the
//! normalized Wigner functions are `C / (2πħ)^N` (see [`Atom::wigner`]).
//!
//! Modes are labelled as `C_n = 2^N/(2πi) ∮ z^{N−n} (z²+1)^{−N} exp[x (z²−1)/(z²+1)] dz`
//! with `x = 𝒜/(αħ)`. The nonzero ones are `C_{2m+N+1}`, carrying the
//! stargenvalue `ħα(2m+N)`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Result, StargenError};
use crate::linalg::{bilinear, symplectic_j, CMat, CVec};
use crate::quad_star::{QuadraticForm, ScaleKind, SymplecticScale};
use crate::special::{airy, gamma_complex, hyp1f1, laguerre_coefficients};
use crate::symbols::{moyal_bracket, star_poly, theta_coeffs, AirySymbol, GaussSymbol, Poly, PolySymbol};

/// Default truncation of discrete measures.
pub const DEFAULT_N_MAX: u32 = 32;

/// Tolerance on `[𝒜, B]_M = 1` for conjugate generators.
const BRACKET_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    Discrete,
    Continuous,
}

/// One stargenfunction `Δ` with `Δ ⋆ 𝒜 = a Δ` and, for non-diagonal
/// elements, `𝒜 ⋆ Δ = b Δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    /// Right stargenvalue `a`.
    pub eigenvalue: f64,
    /// Left stargenvalue `b` when it differs from `a`.
    pub left_eigenvalue: Option<f64>,
    /// Mode label (`2m + N + 1` for diagonal atoms).
    pub mode: u32,
    pub symbol: GaussSymbol,
}

impl Atom {
    pub fn left(&self) -> f64 {
        self.left_eigenvalue.unwrap_or(self.eigenvalue)
    }

    /// `C / (2πħ)^N`.
    pub fn wigner(&self) -> GaussSymbol {
        let cfg = self.symbol.config();
        let norm = (2.0 * PI * cfg.hbar).powi(cfg.dim_n as i32);
        self.symbol.scale(C64::new(1.0 / norm, 0.0))
    }
}

/// Continuous-spectrum density `a ↦ Δ_*(𝒜 − a)(z)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ContinuousKernel {
    /// Imaginary `α = iγ`: the Γ·₁F₁ closed form.
    Hyperbolic { form: QuadraticForm, gamma: f64 },
    /// Degenerate form with constant `Θ₂`: `|σ| Ai(σ(𝒜 − a))`.
    Airy { form: QuadraticForm, sigma: f64 },
}

impl ContinuousKernel {
    pub fn form(&self) -> &QuadraticForm {
        match self {
            Self::Hyperbolic { form, .. } | Self::Airy { form, .. } => form,
        }
    }

    pub fn eval(&self, a: f64, z: &[f64]) -> Result<C64> {
        let form = self.form();
        if z.len() != form.config.nvars() {
            return Err(StargenError::DimensionMismatch { expected: form.config.nvars(), got: z.len() });
        }
        match self {
            Self::Hyperbolic { form, gamma } => {
                let (x, shift) = completed_square(form, z)?;
                hyperbolic_density(x, a + shift, *gamma, form.config.hbar, form.config.dim_n)
            }
            Self::Airy { form, sigma } => {
                let u = sigma * (form.eval(z).re - a);
                Ok(C64::new(sigma.abs() * airy(u)?, 0.0))
            }
        }
    }

    /// The kernel of `𝒜(F z + d)`.
    pub fn compose_affine(&self, f: &CMat, d: &CVec) -> Self {
        match self {
            Self::Hyperbolic { form, gamma } => Self::Hyperbolic { form: form.compose_affine(f, d), gamma: *gamma },
            Self::Airy { form, sigma } => Self::Airy { form: form.compose_affine(f, d), sigma: *sigma },
        }
    }
}

/// `𝒜₀(z) + ¼bᵀA⁻¹b` (the form without its constant, completed to a
/// square) and the matching eigenvalue shift `¼bᵀA⁻¹b − κ`.
fn completed_square(form: &QuadraticForm, z: &[f64]) -> Result<(C64, f64)> {
    let c = quarter_b_ainv_b(form)?;
    let x = form.eval(z) - form.constant + c;
    Ok((x, (c - form.constant).re))
}

fn quarter_b_ainv_b(form: &QuadraticForm) -> Result<C64> {
    if form.b.iter().all(|x| *x == C64::new(0.0, 0.0)) {
        return Ok(C64::new(0.0, 0.0));
    }
    let inv = form.inverse_a()?;
    Ok(bilinear(&form.b, &(&inv * &form.b)) * 0.25)
}

/// `(1/2π) ∫dk cosh(ħγk)^{−N} exp[i x tanh(ħγk)/(ħγ) − ika]` in closed form.
pub fn hyperbolic_density(x: C64, a: f64, gamma: f64, hbar: f64, n: usize) -> Result<C64> {
    let hg = hbar * gamma;
    let nf = n as f64;
    let s_plus = C64::new(nf / 2.0, a / (2.0 * hg));
    let s_minus = C64::new(nf / 2.0, -a / (2.0 * hg));
    let gam_n: f64 = (1..n).map(|k| k as f64).product();
    let pref = 2f64.powi(n as i32 - 2) / (gamma * PI * hbar);
    let g = gamma_complex(s_plus)? * gamma_complex(s_minus)? / gam_n;
    let i = C64::new(0.0, 1.0);
    let f = hyp1f1(s_plus, C64::new(nf, 0.0), -i * x * (2.0 / hg))?;
    Ok(g * pref * (i * x / hg).exp() * f)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    pub kind: MeasureKind,
    /// Sorted by eigenvalue (then left eigenvalue).
    pub atoms: Vec<Atom>,
    pub continuous: Option<ContinuousKernel>,
    /// Mode count kept when an infinite family was cut off.
    pub truncated_at: Option<u32>,
}

impl SpectralMeasure {
    pub fn discrete(mut atoms: Vec<Atom>, truncated_at: Option<u32>) -> Self {
        atoms.sort_by(|x, y| x.eigenvalue.total_cmp(&y.eigenvalue).then(x.left().total_cmp(&y.left())));
        Self { kind: MeasureKind::Discrete, atoms, continuous: None, truncated_at }
    }

    pub fn continuous(kernel: ContinuousKernel) -> Self {
        Self { kind: MeasureKind::Continuous, atoms: Vec::new(), continuous: Some(kernel), truncated_at: None }
    }

    /// The atom whose eigenvalue matches `a` to `1e−9·max(1, |a_n|)`.
    pub fn find(&self, a: f64) -> Option<&Atom> {
        self.atoms.iter().find(|at| (at.eigenvalue - a).abs() < 1e-9 * at.eigenvalue.abs().max(1.0))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.eigenvalue).collect()
    }

    /// Applies `z ↦ F z + d` to every atom and kernel.
    pub fn compose_affine(&self, f: &CMat, d: &CVec) -> Self {
        Self {
            kind: self.kind,
            atoms: self.atoms.iter().map(|a| Atom { symbol: a.symbol.compose_affine(f, d), ..a.clone() }).collect(),
            continuous: self.continuous.as_ref().map(|k| k.compose_affine(f, d)),
            truncated_at: self.truncated_at,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let atoms: Vec<serde_json::Value> = self
            .atoms
            .iter()
            .map(|a| {
                let mut v = json!({ "eigenvalue": a.eigenvalue, "mode": a.mode, "symbol": a.symbol.to_json() });
                if let Some(l) = a.left_eigenvalue {
                    v["left_eigenvalue"] = json!(l);
                }
                v
            })
            .collect();
        let mut out = json!({ "kind": self.kind, "atoms": atoms });
        if let Some(t) = self.truncated_at {
            out["truncated_at"] = json!(t);
        }
        match &self.continuous {
            Some(ContinuousKernel::Hyperbolic { gamma, .. }) => {
                out["continuous"] = json!({ "type": "hyperbolic", "gamma": gamma });
            }
            Some(ContinuousKernel::Airy { sigma, .. }) => {
                out["continuous"] = json!({ "type": "airy", "sigma": sigma });
            }
            None => {}
        }
        out
    }

    /// Re-imports a discrete measure written by [`SpectralMeasure::to_json`].
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let kind: MeasureKind = serde_json::from_value(v["kind"].clone())?;
        if kind != MeasureKind::Discrete {
            return Err(StargenError::Unsupported("only discrete measures can be re-imported".into()));
        }
        let raw = v["atoms"].as_array().ok_or_else(|| StargenError::Serde("missing atoms".into()))?;
        let mut atoms = Vec::with_capacity(raw.len());
        for a in raw {
            let eigenvalue =
                a["eigenvalue"].as_f64().ok_or_else(|| StargenError::Serde("missing eigenvalue".into()))?;
            atoms.push(Atom {
                eigenvalue,
                left_eigenvalue: a.get("left_eigenvalue").and_then(|x| x.as_f64()),
                mode: a.get("mode").and_then(|x| x.as_u64()).unwrap_or(0) as u32,
                symbol: GaussSymbol::from_json(&a["symbol"])?,
            });
        }
        let truncated_at = v.get("truncated_at").and_then(|x| x.as_u64()).map(|x| x as u32);
        Ok(Self::discrete(atoms, truncated_at))
    }
}

fn require_proportional(scale: &SymplecticScale) -> Result<()> {
    match scale.kind {
        ScaleKind::NotProportional => Err(StargenError::NotProportional),
        _ if scale.alpha.norm() == 0.0 => Err(StargenError::AlphaZero),
        _ => Ok(()),
    }
}

/// `x = (𝒜₀ + ¼bᵀA⁻¹b)/(αħ)` as a polynomial in `z`, plus the eigenvalue
/// offset `κ − ¼bᵀA⁻¹b`.
fn scaled_argument(qf: &QuadraticForm, alpha: f64) -> Result<(QuadraticForm, f64)> {
    let c = quarter_b_ainv_b(qf)?;
    let h = alpha * qf.config.hbar;
    let mut x = qf.clone().with_constant(c);
    x.a /= C64::new(h, 0.0);
    x.b /= C64::new(h, 0.0);
    x.constant /= h;
    Ok((x, (qf.constant - c).re))
}

/// `e^{−x} Σ_k coeffs[k] x^k` as a Gaussian symbol.
fn exp_times_poly_of(x: &QuadraticForm, coeffs: &[C64]) -> Result<GaussSymbol> {
    let cfg = x.config;
    let xp = x.to_symbol();
    let mut pre = PolySymbol::zero(cfg);
    let mut pow = PolySymbol::one(cfg);
    for (k, c) in coeffs.iter().enumerate() {
        if k > 0 {
            pow = pow.mul(&xp);
        }
        pre = pre.add(&pow.scale(*c));
    }
    GaussSymbol::new(pre, -&x.a, -&x.b, -x.constant)
}

/// Closed-form atom `C_{2m+N+1} = 2^N (−1)^m e^{−x} L_m^{N−1}(2x)`.
fn laguerre_atom(x: &QuadraticForm, m: u32) -> Result<GaussSymbol> {
    let n = x.config.dim_n as u32;
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let pref = 2f64.powi(n as i32) * sign;
    let coeffs: Vec<C64> = laguerre_coefficients(m, n - 1)
        .iter()
        .enumerate()
        .map(|(k, c)| C64::new(pref * c * 2f64.powi(k as i32), 0.0))
        .collect();
    exp_times_poly_of(x, &coeffs)
}

/// Stargenfunctions of `𝒜` for a symplectic-proportional quadratic form.
///
/// Real `α`: the discrete family `C_{2m+N+1}`, `m ≤ n_max`, with
/// eigenvalues `ħα(2m+N) + κ − ¼bᵀA⁻¹b`. Imaginary `α`: the continuous
/// Γ·₁F₁ kernel.
pub fn stargen_diag(qf: &QuadraticForm, scale: &SymplecticScale, n_max: u32) -> Result<SpectralMeasure> {
    require_proportional(scale)?;
    match scale.kind {
        ScaleKind::RealAlpha => {
            let alpha = scale.alpha.re;
            let (x, offset) = scaled_argument(qf, alpha)?;
            let n = qf.config.dim_n as u32;
            let h = qf.config.hbar;
            let atoms = (0..=n_max)
                .map(|m| {
                    Ok(Atom {
                        eigenvalue: h * alpha * (2 * m + n) as f64 + offset,
                        left_eigenvalue: None,
                        mode: 2 * m + n + 1,
                        symbol: laguerre_atom(&x, m)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SpectralMeasure::discrete(atoms, Some(n_max + 1)))
        }
        ScaleKind::ImaginaryAlpha => {
            Ok(SpectralMeasure::continuous(ContinuousKernel::Hyperbolic { form: qf.clone(), gamma: scale.gamma }))
        }
        _ => Err(StargenError::Unsupported("α must be real or purely imaginary".into())),
    }
}

/// Fourier mode `C_n` from trapezoid quadrature of the contour integral on
/// `|z| = 0.5`, doubling the node count until the coefficients settle.
pub fn mode_coefficient(qf: &QuadraticForm, scale: &SymplecticScale, n: u32) -> Result<GaussSymbol> {
    require_proportional(scale)?;
    if scale.kind != ScaleKind::RealAlpha {
        return Err(StargenError::Unsupported("Fourier modes need real α".into()));
    }
    let (x, _) = scaled_argument(qf, scale.alpha.re)?;
    let dim = qf.config.dim_n as i32;
    // e^{x(z²−1)/(z²+1)} = e^{−x} Σ_k (2x)^k w^k / k!, w = z²/(z²+1);
    // only w^k with 2k ≤ n − N − 1 reach the residue.
    let kmax = if n as i32 > dim { (n as i32 - dim - 1) / 2 } else { -1 };
    if kmax < 0 {
        return exp_times_poly_of(&x, &[]);
    }
    let kmax = kmax as usize;
    let radius = 0.5;
    let mut nodes = 512usize;
    let mut prev: Option<Vec<C64>> = None;
    loop {
        let mut acc = vec![C64::new(0.0, 0.0); kmax + 1];
        for j in 0..nodes {
            let z = C64::from_polar(radius, 2.0 * PI * j as f64 / nodes as f64);
            let z2 = z * z;
            let base = z.powi(dim - n as i32 + 1) / (z2 + 1.0).powi(dim);
            let w = z2 / (z2 + 1.0);
            let mut wk = C64::new(1.0, 0.0);
            for a in acc.iter_mut() {
                *a += base * wk;
                wk *= w;
            }
        }
        let mut fact = 1.0;
        let coeffs: Vec<C64> = acc
            .iter()
            .enumerate()
            .map(|(k, a)| {
                if k > 0 {
                    fact *= k as f64;
                }
                *a / nodes as f64 * 2f64.powi(dim + k as i32) / fact
            })
            .collect();
        if let Some(p) = &prev {
            let diff = coeffs.iter().zip(p).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            let size = coeffs.iter().map(|a| a.norm()).fold(1.0, f64::max);
            if diff <= 1e-11 * size {
                let cleaned: Vec<C64> =
                    coeffs.iter().map(|c| if c.norm() <= 1e-13 * size { C64::new(0.0, 0.0) } else { *c }).collect();
                return exp_times_poly_of(&x, &cleaned);
            }
        }
        if nodes >= 1 << 16 {
            return Err(StargenError::Divergent("contour quadrature did not settle".into()));
        }
        prev = Some(coeffs);
        nodes *= 2;
    }
}

/// `μ(k) = ikλ/(e^{ikλ} − 1)`, with `μ(0) = 1`.
pub fn mu(k: C64, lambda_step: f64) -> Result<C64> {
    let x = C64::new(0.0, 1.0) * k * lambda_step;
    if x.norm() < 1e-8 {
        // x / (e^x − 1) = 1 − x/2 + x²/12 − x⁴/720
        let x2 = x * x;
        return Ok(1.0 - x / 2.0 + x2 / 12.0 - x2 * x2 / 720.0);
    }
    let den = x.exp() - 1.0;
    if den.norm() < 1e-14 * x.norm().max(1.0) {
        return Err(StargenError::Pole { det_abs: den.norm() });
    }
    Ok(x / den)
}

/// Ladder symbol `T` with `𝒜 ⋆ T − T ⋆ 𝒜 = λT`.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderSpec {
    pub t_symbol: PolySymbol,
    pub lambda_step: f64,
    pub n_steps: u32,
    /// Per-atom factors `β`; empty means all ones.
    pub normalization: Vec<f64>,
}

/// Checks `𝒜 ⋆ T − T ⋆ 𝒜 = λT` coefficient-wise.
pub fn check_ladder(qf: &QuadraticForm, ladder: &LadderSpec) -> Result<()> {
    let a = qf.to_symbol();
    let t = &ladder.t_symbol;
    let comm = star_poly(&a, t)?.sub(&crate::symbols::star_poly_right(t, &a)?);
    let dev = comm.max_diff(&t.scale_re(ladder.lambda_step));
    let size = t.poly.max_coeff().max(1.0) * ladder.lambda_step.abs().max(1.0);
    if dev > 1e-12 * size {
        return Err(StargenError::InvalidLadder(format!("[𝒜, T] deviates from λT by {dev:e}")));
    }
    Ok(())
}

/// Non-diagonal elements `(T⋆)^n Δ` of a discrete measure: each atom is
/// star-multiplied on the left `n_steps` times and rescaled, moving its left
/// eigenvalue by `n_steps·λ`.
pub fn stargen_nondiag_ladder(
    qf: &QuadraticForm,
    ladder: &LadderSpec,
    base: &SpectralMeasure,
) -> Result<SpectralMeasure> {
    if base.kind != MeasureKind::Discrete {
        return Err(StargenError::Unsupported("ladder construction needs a discrete base measure".into()));
    }
    if !ladder.normalization.is_empty() && ladder.normalization.len() != base.atoms.len() {
        return Err(StargenError::DimensionMismatch { expected: base.atoms.len(), got: ladder.normalization.len() });
    }
    check_ladder(qf, ladder)?;
    let shift = ladder.n_steps as f64 * ladder.lambda_step;
    let atoms = base
        .atoms
        .iter()
        .enumerate()
        .map(|(i, atom)| {
            let mut s = atom.symbol.clone();
            for _ in 0..ladder.n_steps {
                s = star_poly(&ladder.t_symbol, &s)?;
            }
            let beta = ladder.normalization.get(i).copied().unwrap_or(1.0);
            let left = atom.left() + shift;
            Ok(Atom {
                eigenvalue: atom.eigenvalue,
                left_eigenvalue: (ladder.n_steps > 0 || atom.left_eigenvalue.is_some()).then_some(left),
                mode: atom.mode,
                symbol: s.scale(C64::new(beta, 0.0)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralMeasure::discrete(atoms, base.truncated_at))
}

/// `|σ| Ai(σ(𝒜 − a))` kernel for a one-dimensional form with `Θ₁ = 0` and
/// constant `Θ₂ ≠ 0`, where `σ = (8/(ħ²Θ₂))^{1/3}`.
pub fn stargen_airy(qf: &QuadraticForm) -> Result<SpectralMeasure> {
    let sigma = airy_sigma(qf)?;
    Ok(SpectralMeasure::continuous(ContinuousKernel::Airy { form: qf.clone(), sigma }))
}

fn airy_sigma(qf: &QuadraticForm) -> Result<f64> {
    if qf.config.dim_n != 1 || !qf.is_real() {
        return Err(StargenError::Unsupported("Airy kernels need a real one-dimensional form".into()));
    }
    let th = theta_coeffs(&qf.to_symbol())?;
    let scale = crate::linalg::max_abs(&qf.a).max(1e-300);
    if th.theta1.poly.max_coeff() > 1e-12 * scale * scale || th.theta2.degree() > 0 {
        return Err(StargenError::Unsupported("Airy kernel needs Θ₁ = 0 and constant Θ₂".into()));
    }
    let t2 = th.theta2.poly.coeff(&[0, 0]).re;
    if t2 == 0.0 {
        return Err(StargenError::Unsupported("Θ₂ vanishes; the star-exponential is classical".into()));
    }
    Ok((8.0 / (qf.config.hbar.powi(2) * t2)).cbrt())
}

/// `Δ_*(𝒜, b, a)` with `𝒜 ⋆ Δ = bΔ`, `Δ ⋆ 𝒜 = aΔ`, for a degenerate form with
/// linear conjugate generator `B = wᵀz + w₀` (`[𝒜, B]_M = 1`):
/// `e^{−(i/ħ)(b−a)B(z)} Δ_*(𝒜 − a)(z + ½(b−a) Jᵀw)`.
pub fn stargen_nondiag_continuous(qf: &QuadraticForm, b_symbol: &PolySymbol, a: f64, b: f64) -> Result<AirySymbol> {
    let cfg = qf.config;
    if !b_symbol.config.compatible(&cfg) {
        return Err(StargenError::InvalidConfig("generator lives on a different phase space".into()));
    }
    let bracket = moyal_bracket(&qf.to_symbol(), b_symbol)?;
    let dev = bracket.max_diff(&PolySymbol::one(cfg));
    if dev > BRACKET_TOL {
        return Err(StargenError::IncompatibleGenerator(format!("[𝒜, B]_M differs from 1 by {dev:e}")));
    }
    if b_symbol.degree() > 1 {
        return Err(StargenError::Unsupported("conjugate generator must be linear".into()));
    }
    let sigma = airy_sigma(qf)?;
    let n = cfg.nvars();
    let w = CVec::from_iterator(
        n,
        (0..n).map(|i| {
            let mut e = vec![0u32; n];
            e[i] = 1;
            b_symbol.poly.coeff(&e)
        }),
    );
    let w0 = b_symbol.poly.coeff(&vec![0; n]);
    let lam = b - a;
    let shift = symplectic_j(cfg.dim_n).transpose() * &w * C64::new(lam / 2.0, 0.0);
    let moved = qf.compose_affine(&CMat::identity(n, n), &shift);
    let arg = moved.to_symbol().poly.add(&Poly::constant(n, C64::new(-a, 0.0))).scale(C64::new(sigma, 0.0));
    let phase = C64::new(0.0, -lam / cfg.hbar);
    Ok(AirySymbol::new(cfg, &w * phase, phase * w0, C64::new(sigma.abs(), 0.0), arg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PhaseConfig;
    use crate::quad_star::{factor_sa, symplectic_scale, FactorMethod};
    use crate::special::laguerre;
    use crate::symbols::star_poly_right;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ho(cfg: PhaseConfig) -> QuadraticForm {
        let n = cfg.nvars();
        QuadraticForm::new(cfg, CMat::identity(n, n) * c(0.5, 0.0), CVec::zeros(n)).unwrap()
    }

    fn scale_of(qf: &QuadraticForm) -> SymplecticScale {
        let f = factor_sa(qf, FactorMethod::Diagonalization).unwrap();
        symplectic_scale(qf, &f).unwrap()
    }

    fn pts() -> Vec<[f64; 2]> {
        let mut v = Vec::new();
        for i in 0..7 {
            for j in 0..7 {
                v.push([-1.5 + 0.5 * i as f64, -1.5 + 0.5 * j as f64]);
            }
        }
        v
    }

    #[test]
    fn ho_atoms_are_laguerre_wigner_functions() {
        let qf = ho(PhaseConfig::unit(1));
        let m = stargen_diag(&qf, &scale_of(&qf), 6).unwrap();
        assert_eq!(m.kind, MeasureKind::Discrete);
        for (n, atom) in m.atoms.iter().enumerate() {
            assert!((atom.eigenvalue - (n as f64 + 0.5)).abs() < 1e-14);
            assert_eq!(atom.mode, 2 * n as u32 + 2);
            for z in pts() {
                let h = 0.5 * (z[0] * z[0] + z[1] * z[1]);
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let want = sign * (-2.0 * h).exp() * laguerre(n as u32, 0, 4.0 * h) / PI;
                assert!((atom.wigner().eval(&z).unwrap() - want).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn contour_modes_match_closed_form() {
        for dim in [1usize, 2] {
            let qf = ho(PhaseConfig::unit(dim));
            let sc = scale_of(&qf);
            let m = stargen_diag(&qf, &sc, 5).unwrap();
            for atom in &m.atoms {
                let cm = mode_coefficient(&qf, &sc, atom.mode).unwrap();
                let z: Vec<f64> = (0..2 * dim).map(|i| 0.3 * i as f64 - 0.4).collect();
                let d = (cm.eval(&z).unwrap() - atom.symbol.eval(&z).unwrap()).norm();
                assert!(d < 1e-9, "mode {} dim {dim}: {d}", atom.mode);
            }
        }
    }

    #[test]
    fn vanishing_modes() {
        let qf = ho(PhaseConfig::unit(1));
        let sc = scale_of(&qf);
        // n ≤ N and n − N even vanish; for N = 1 that is every odd label.
        for n in [0u32, 1, 3, 5, 7] {
            assert!(mode_coefficient(&qf, &sc, n).unwrap().prefactor.poly.is_zero(), "mode {n}");
        }
        let ground = mode_coefficient(&qf, &sc, 2).unwrap();
        assert!((ground.eval(&[0.0, 0.0]).unwrap() - c(2.0, 0.0)).norm() < 1e-12);
        let third = mode_coefficient(&qf, &sc, 4).unwrap();
        let z = [0.3, 0.8];
        let h = 0.5 * (0.09 + 0.64);
        let want = -2.0 * (-2.0f64 * h).exp() * (1.0 - 4.0 * h);
        assert!((third.eval(&z).unwrap() - c(want, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn shifted_oscillator_eigenvalues() {
        // ½(p² + q²) + q + 3 = ½(p² + (q+1)²) + 5/2
        let cfg = PhaseConfig::unit(1);
        let qf =
            QuadraticForm::new(cfg, CMat::identity(2, 2) * c(0.5, 0.0), CVec::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]))
                .unwrap()
                .with_constant(c(3.0, 0.0));
        let m = stargen_diag(&qf, &scale_of(&qf), 3).unwrap();
        let a = qf.to_symbol();
        for (n, atom) in m.atoms.iter().enumerate() {
            assert!((atom.eigenvalue - (n as f64 + 3.0)).abs() < 1e-13);
            let r = star_poly(&a, &atom.symbol).unwrap().sub(&atom.symbol.scale(c(atom.eigenvalue, 0.0))).unwrap();
            for z in pts() {
                assert!(r.eval(&z).unwrap().norm() < 1e-10);
            }
        }
    }

    #[test]
    fn alpha_zero_is_rejected() {
        let cfg = PhaseConfig::unit(1);
        let qf = QuadraticForm::new(
            cfg,
            CMat::from_diagonal(&CVec::from_vec(vec![c(0.5, 0.0), c(0.0, 0.0)])),
            CVec::zeros(2),
        )
        .unwrap();
        let sc = scale_of(&qf);
        assert!(matches!(stargen_diag(&qf, &sc, 3), Err(StargenError::AlphaZero)));
    }

    #[test]
    fn continuous_kernel_at_origin_is_gamma_prefactor() {
        let cfg = PhaseConfig::unit(1);
        let qf = QuadraticForm::new(
            cfg,
            CMat::from_diagonal(&CVec::from_vec(vec![c(0.5, 0.0), c(-0.5, 0.0)])),
            CVec::zeros(2),
        )
        .unwrap();
        let sc = scale_of(&qf);
        assert_eq!(sc.kind, ScaleKind::ImaginaryAlpha);
        assert!((sc.gamma - 0.5).abs() < 1e-14);
        let m = stargen_diag(&qf, &sc, 0).unwrap();
        let k = m.continuous.unwrap();
        // 2^{-1}/(γπ) Γ(½)² = 1/(2·½·π) · π = 1
        let v = k.eval(0.0, &[0.0, 0.0]).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-12, "{v}");
    }

    #[test]
    fn mu_values() {
        assert_eq!(mu(c(0.0, 0.0), 2.0).unwrap(), c(1.0, 0.0));
        let v = mu(c(PI, 0.0), 1.0).unwrap();
        assert!((v - c(0.0, -PI / 2.0)).norm() < 1e-14);
        let k2 = c(0.37, 0.0);
        let i = c(0.0, 1.0);
        let want = 2.0 * i * k2 / ((2.0 * i * k2).exp() - 1.0);
        assert!((mu(k2, 2.0).unwrap() - want).norm() < 1e-15);
        assert!(matches!(mu(c(2.0 * PI, 0.0), 1.0), Err(StargenError::Pole { .. })));
        let small = mu(c(1e-10, 0.0), 1.0).unwrap();
        assert!((small - c(1.0, -5e-11)).norm() < 1e-15);
    }

    #[test]
    fn ladder_zero_steps_is_identity_and_bad_ladder_rejected() {
        let cfg = PhaseConfig::unit(1);
        let qf = ho(cfg);
        let base = stargen_diag(&qf, &scale_of(&qf), 3).unwrap();
        let s = 0.5f64.sqrt();
        let adag = PolySymbol::q(cfg, 0).scale_re(s).sub(&PolySymbol::p(cfg, 0).scale(c(0.0, s)));
        let spec = LadderSpec { t_symbol: adag.clone(), lambda_step: 1.0, n_steps: 0, normalization: vec![] };
        assert_eq!(stargen_nondiag_ladder(&qf, &spec, &base).unwrap(), base);
        let wrong = LadderSpec { lambda_step: -1.0, n_steps: 1, ..spec };
        assert!(matches!(stargen_nondiag_ladder(&qf, &wrong, &base), Err(StargenError::InvalidLadder(_))));
    }

    #[test]
    fn ladder_moves_left_eigenvalue() {
        let cfg = PhaseConfig::unit(1);
        let qf = ho(cfg);
        let a = qf.to_symbol();
        let base = stargen_diag(&qf, &scale_of(&qf), 3).unwrap();
        let s = 0.5f64.sqrt();
        let adag = PolySymbol::q(cfg, 0).scale_re(s).sub(&PolySymbol::p(cfg, 0).scale(c(0.0, s)));
        let spec = LadderSpec { t_symbol: adag, lambda_step: 1.0, n_steps: 2, normalization: vec![] };
        let out = stargen_nondiag_ladder(&qf, &spec, &base).unwrap();
        for atom in &out.atoms {
            assert_eq!(atom.left(), atom.eigenvalue + 2.0);
            let l = star_poly(&a, &atom.symbol).unwrap().sub(&atom.symbol.scale(c(atom.left(), 0.0))).unwrap();
            let r =
                star_poly_right(&atom.symbol, &a).unwrap().sub(&atom.symbol.scale(c(atom.eigenvalue, 0.0))).unwrap();
            for z in pts() {
                assert!(l.eval(&z).unwrap().norm() < 1e-9 && r.eval(&z).unwrap().norm() < 1e-9);
            }
        }
    }

    fn linear_potential() -> (QuadraticForm, PolySymbol) {
        let cfg = PhaseConfig::unit(1);
        let qf = QuadraticForm::new(
            cfg,
            CMat::from_diagonal(&CVec::from_vec(vec![c(0.5, 0.0), c(0.0, 0.0)])),
            CVec::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]),
        )
        .unwrap();
        (qf, PolySymbol::p(cfg, 0))
    }

    #[test]
    fn airy_nondiagonal_matches_closed_form() {
        let (qf, p) = linear_potential();
        let d = stargen_nondiag_continuous(&qf, &p, 0.0, 1.0).unwrap();
        for z in pts() {
            let h = 0.5 * z[0] * z[0] + z[1];
            let want = C64::from_polar(2.0, -z[0]) * airy(2.0 * (h - 0.5)).unwrap();
            assert!((d.eval(&z).unwrap() - want).norm() < 1e-13);
        }
        let diag = stargen_airy(&qf).unwrap().continuous.unwrap();
        let d0 = stargen_nondiag_continuous(&qf, &p, 0.7, 0.7).unwrap();
        for z in pts() {
            assert!((d0.eval(&z).unwrap() - diag.eval(0.7, &z).unwrap()).norm() < 1e-14);
        }
    }

    #[test]
    fn wrong_generator_rejected() {
        let (qf, _) = linear_potential();
        let q = PolySymbol::q(qf.config, 0);
        assert!(matches!(stargen_nondiag_continuous(&qf, &q, 0.0, 1.0), Err(StargenError::IncompatibleGenerator(_))));
    }

    #[test]
    fn measure_json_round_trip() {
        let qf = ho(PhaseConfig::unit(1));
        let m = stargen_diag(&qf, &scale_of(&qf), 4).unwrap();
        let back = SpectralMeasure::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert_eq!(m.to_json()["kind"], "discrete");
    }
}
