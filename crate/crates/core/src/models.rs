//! Reference models: 1-D harmonic oscillator, linear potential and the 2-D
//! isotropic oscillator with angular momentum.
//!
//! Oscillator formulas are written in the dimensionless variables
//! `P = p/√(mωħ)`, `Q = q√(mω/ħ)` and carry an overall `1/ħ^N`, so every
//! Wigner function integrates to one for any `ħ`, `m`, `ω`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::config::PhaseConfig;
use crate::error::{Result, StargenError};
use crate::quad_star::{factor_sa, symplectic_scale, FactorMethod, QuadraticForm};
use crate::special::{factorial, laguerre_coefficients};
use crate::spectral::{stargen_airy, stargen_diag, stargen_nondiag_continuous, LadderSpec, SpectralMeasure};
use crate::symbols::{AirySymbol, GaussSymbol, PolySymbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ho1d,
    Linear,
    Ho2d,
}

impl ModelKind {
    pub fn dim(self) -> usize {
        match self {
            Self::Ho1d | Self::Linear => 1,
            Self::Ho2d => 2,
        }
    }
}

impl FromStr for ModelKind {
    type Err = StargenError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ho1d" => Ok(Self::Ho1d),
            "linear" => Ok(Self::Linear),
            "ho2d" => Ok(Self::Ho2d),
            other => {
                Err(StargenError::InvalidConfig(format!("unknown model {other:?} (expected ho1d, linear or ho2d)")))
            }
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ho1d => "ho1d",
            Self::Linear => "linear",
            Self::Ho2d => "ho2d",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelId {
    pub kind: ModelKind,
    pub config: PhaseConfig,
    /// Diagonal regulator for the linear potential.
    pub lambda: f64,
}

impl ModelId {
    pub fn new(kind: ModelKind, hbar: f64, mass: f64, omega: f64) -> Result<Self> {
        let config = PhaseConfig::new(kind.dim(), hbar, mass, omega)?;
        Ok(Self { kind, config, lambda: 1e-6 })
    }

    pub fn unit(kind: ModelKind) -> Self {
        Self { kind, config: PhaseConfig::unit(kind.dim()), lambda: 1e-6 }
    }

    pub fn hamiltonian(&self) -> PolySymbol {
        let cfg = self.config;
        match self.kind {
            ModelKind::Ho1d | ModelKind::Ho2d => oscillator_h(cfg),
            ModelKind::Linear => {
                let p = PolySymbol::p(cfg, 0);
                p.mul(&p).scale_re(0.5 / cfg.mass).add(&PolySymbol::q(cfg, 0))
            }
        }
    }

    pub fn quadratic_form(&self) -> QuadraticForm {
        QuadraticForm::from_symbol(&self.hamiltonian()).expect("model Hamiltonians are quadratic")
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `Σ_i p_i²/(2m) + mω²q_i²/2`.
pub fn oscillator_h(cfg: PhaseConfig) -> PolySymbol {
    let mut h = PolySymbol::zero(cfg);
    for i in 0..cfg.dim_n {
        let p = PolySymbol::p(cfg, i);
        let q = PolySymbol::q(cfg, i);
        h = h.add(&p.mul(&p).scale_re(0.5 / cfg.mass)).add(&q.mul(&q).scale_re(0.5 * cfg.mass * cfg.omega * cfg.omega));
    }
    h
}

/// Dimensionless `P_i`.
fn p_tilde(cfg: PhaseConfig, i: usize) -> PolySymbol {
    PolySymbol::p(cfg, i).scale_re(1.0 / (cfg.mass * cfg.omega * cfg.hbar).sqrt())
}

/// Dimensionless `Q_i`.
fn q_tilde(cfg: PhaseConfig, i: usize) -> PolySymbol {
    PolySymbol::q(cfg, i).scale_re((cfg.mass * cfg.omega / cfg.hbar).sqrt())
}

/// `H/(ħω)` in dimensionless variables.
fn h_tilde(cfg: PhaseConfig) -> PolySymbol {
    oscillator_h(cfg).scale_re(1.0 / (cfg.hbar * cfg.omega))
}

/// `Σ_k c_k x^k`.
fn poly_in(x: &PolySymbol, coeffs: &[f64]) -> PolySymbol {
    let mut out = PolySymbol::zero(x.config);
    let mut pow = PolySymbol::one(x.config);
    for (k, ck) in coeffs.iter().enumerate() {
        if k > 0 {
            pow = pow.mul(x);
        }
        out = out.add(&pow.scale_re(*ck));
    }
    out
}

/// `L_n^α(x)` as a polynomial symbol.
fn laguerre_of(n: u32, alpha: u32, x: &PolySymbol) -> PolySymbol {
    poly_in(x, &laguerre_coefficients(n, alpha))
}

/// `a† = (Q − iP)/√2` in dimensionless variables.
pub fn creation(cfg: PhaseConfig) -> PolySymbol {
    let s = 0.5f64.sqrt();
    q_tilde(cfg, 0).scale_re(s).sub(&p_tilde(cfg, 0).scale(c(0.0, s)))
}

/// Wigner function `F_{nm}` of `|n⟩⟨m|` for the 1-D oscillator:
/// `H ⋆ F_{nm} = E_n F_{nm}`, `F_{nm} ⋆ H = E_m F_{nm}`.
pub fn ho1d_wigner(cfg: PhaseConfig, n: u32, m: u32) -> Result<GaussSymbol> {
    if cfg.dim_n != 1 {
        return Err(StargenError::DimensionMismatch { expected: 1, got: cfg.dim_n });
    }
    if n < m {
        return Ok(ho1d_wigner(cfg, m, n)?.conj());
    }
    let (hi, lo) = (n, m);
    let k = hi - lo;
    let h = h_tilde(cfg);
    let sign = if lo % 2 == 0 { 1.0 } else { -1.0 };
    let pref = sign * (factorial(lo) / factorial(hi)).sqrt() / (PI * cfg.hbar);
    let ladder = creation(cfg).scale_re(2.0).pow(k);
    let lag = laguerre_of(lo, k, &h.scale_re(4.0));
    GaussSymbol::from_exponent(ladder.mul(&lag).scale_re(pref), &h.scale_re(-2.0))
}

/// `L₃ = q₁p₂ − p₁q₂`.
pub fn l3(cfg: PhaseConfig) -> PolySymbol {
    PolySymbol::q(cfg, 0).mul(&PolySymbol::p(cfg, 1)).sub(&PolySymbol::p(cfg, 0).mul(&PolySymbol::q(cfg, 1)))
}

/// Translation symbol `T = ħ[(Q₁ + iQ₂)² + (P₁ + iP₂)²]`, with
/// `L₃ ⋆ T − T ⋆ L₃ = 2ħT` and `H ⋆ T = T ⋆ H`.
pub fn t_symbol(cfg: PhaseConfig) -> PolySymbol {
    let i = c(0.0, 1.0);
    let qq = q_tilde(cfg, 0).add(&q_tilde(cfg, 1).scale(i));
    let pp = p_tilde(cfg, 0).add(&p_tilde(cfg, 1).scale(i));
    qq.mul(&qq).add(&pp.mul(&pp)).scale_re(cfg.hbar)
}

/// `I_r = {−r, −r+2, …, r}`.
pub fn index_set(r: u32) -> Vec<i32> {
    (0..=r).map(|l| -(r as i32) + 2 * l as i32).collect()
}

fn check_in_ir(r: u32, s: i32) -> Result<()> {
    if s.unsigned_abs() > r || (r as i32 - s) % 2 != 0 {
        return Err(StargenError::Index(format!("s = {s} is not in I_{r} = {:?}", index_set(r))));
    }
    Ok(())
}

/// Wigner function `F_{rs′,rs}` of `|r s′⟩⟨r s|` for the 2-D oscillator:
/// `H ⋆ F = F ⋆ H = ħω(r+1)F`, `L₃ ⋆ F = ħs′F`, `F ⋆ L₃ = ħsF`.
pub fn ho2d_wigner(cfg: PhaseConfig, r: u32, s_prime: i32, s: i32) -> Result<GaussSymbol> {
    if cfg.dim_n != 2 {
        return Err(StargenError::DimensionMismatch { expected: 2, got: cfg.dim_n });
    }
    check_in_ir(r, s_prime)?;
    check_in_ir(r, s)?;
    let ri = r as i32;
    let (lo, hi) = (s.min(s_prime), s.max(s_prime));
    let k = ((hi - lo) / 2) as u32;
    let fact = |x: i32| factorial(x as u32);
    let ratio = (fact((ri + lo) / 2) * fact((ri - hi) / 2) / (fact((ri + hi) / 2) * fact((ri - lo) / 2))).sqrt();
    let sign = if (r + k).is_multiple_of(2) { 1.0 } else { -1.0 };
    let pref = sign * ratio / (PI * cfg.hbar).powi(2);
    let t = t_symbol(cfg).scale_re(1.0 / cfg.hbar);
    let x = if s_prime > s { t } else { t.conj() };
    let h = h_tilde(cfg);
    let l = l3(cfg).scale_re(1.0 / cfg.hbar);
    let plus = laguerre_of(((ri + lo) / 2) as u32, k, &h.add(&l).scale_re(2.0));
    let minus = laguerre_of(((ri - hi) / 2) as u32, k, &h.sub(&l).scale_re(2.0));
    GaussSymbol::from_exponent(x.pow(k).mul(&plus).mul(&minus).scale_re(pref), &h.scale_re(-2.0))
}

/// Ladder taking the 1-D diagonal atom `C_{ll}` to `C_{l+k, l}`.
pub fn ho1d_ladder(cfg: PhaseConfig, l: u32, k: u32) -> LadderSpec {
    LadderSpec {
        t_symbol: creation(cfg),
        lambda_step: cfg.hbar * cfg.omega,
        n_steps: k,
        normalization: vec![(factorial(l) / factorial(l + k)).sqrt()],
    }
}

/// Ladder taking the 2-D diagonal atom at `s = −r + 2l′` to `s′ = −r + 2l`
/// (`l ≥ l′`) under `L₃`.
pub fn ho2d_ladder(cfg: PhaseConfig, r: u32, l_prime: u32, l: u32) -> Result<LadderSpec> {
    if l < l_prime || l > r {
        return Err(StargenError::Index(format!("need l′ ≤ l ≤ r, got l′ = {l_prime}, l = {l}, r = {r}")));
    }
    let k = l - l_prime;
    let beta = 0.25f64.powi(k as i32)
        * (factorial(l_prime) * factorial(r - l) / (factorial(l) * factorial(r - l_prime))).sqrt()
        / cfg.hbar.powi(k as i32);
    Ok(LadderSpec { t_symbol: t_symbol(cfg), lambda_step: 2.0 * cfg.hbar, n_steps: k, normalization: vec![beta] })
}

/// `Δ_*(H, E′, E) = 2 e^{−i(E′−E)p/ħ} Ai[2(H − (E+E′)/2)]` at `ħ = m = 1`,
/// and its general-`ħ`, `m` counterpart.
pub fn linear_stargen(cfg: PhaseConfig, e_prime: f64, e: f64) -> Result<AirySymbol> {
    let model = ModelId { kind: ModelKind::Linear, config: cfg, lambda: 0.0 };
    stargen_nondiag_continuous(&model.quadratic_form(), &PolySymbol::p(cfg, 0), e, e_prime)
}

/// Energy stargenfunctions of a model: discrete atoms for the oscillators,
/// the Airy kernel for the linear potential.
pub fn energy_measure(model: &ModelId, n_max: u32) -> Result<SpectralMeasure> {
    let qf = model.quadratic_form();
    match model.kind {
        ModelKind::Linear => stargen_airy(&qf),
        _ => {
            let fact = factor_sa(&qf, FactorMethod::Diagonalization)?;
            let scale = symplectic_scale(&qf, &fact)?;
            stargen_diag(&qf, &scale, n_max)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub energy: f64,
    /// Allowed `L₃` values at this energy (2-D oscillator only).
    pub l3_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Spectrum {
    Discrete { levels: Vec<Level> },
    Continuous { min: Option<f64>, max: Option<f64> },
}

/// Joint spectrum up to level `r_max` (at most 64).
pub fn model_spectrum(model: &ModelId, r_max: u32) -> Result<Spectrum> {
    if r_max > 64 {
        return Err(StargenError::InvalidConfig(format!("r_max must be at most 64, got {r_max}")));
    }
    let cfg = model.config;
    let quantum = cfg.hbar * cfg.omega;
    Ok(match model.kind {
        ModelKind::Ho1d => Spectrum::Discrete {
            levels: (0..=r_max).map(|n| Level { energy: quantum * (n as f64 + 0.5), l3_values: vec![] }).collect(),
        },
        ModelKind::Ho2d => Spectrum::Discrete {
            levels: (0..=r_max)
                .map(|r| Level {
                    energy: quantum * (r as f64 + 1.0),
                    l3_values: index_set(r).into_iter().map(|s| cfg.hbar * s as f64).collect(),
                })
                .collect(),
        },
        ModelKind::Linear => Spectrum::Continuous { min: None, max: None },
    })
}
