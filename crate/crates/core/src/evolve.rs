//! Heisenberg-picture evolution under quadratic Hamiltonians.
//!
//! For quadratic `H` the Moyal and Poisson brackets agree on the adjoint
//! action, so `U⁻¹ ⋆ A ⋆ U` is the classical flow substituted into `A`.

use num_complex::Complex64 as C64;

use crate::error::{Result, StargenError};
use crate::grid::PhaseGrid;
use crate::linalg::{max_abs, symplectic_j, CMat, CVec};
use crate::quad_star::QuadraticForm;
use crate::spectral::{MeasureKind, SpectralMeasure};
use crate::symbols::{star_gauss, GaussSymbol, PolySymbol};

/// Tolerance on `ΦᵀJΦ = J`.
pub const SYMPLECTIC_TOL: f64 = 1e-10;

/// Relative quadrature tail used for automatic grids.
const TAIL: f64 = 1e-16;

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionSpec {
    pub hamiltonian: QuadraticForm,
    pub t: f64,
    /// `Φ` in `z(t) = Φ z + d`.
    pub flow: CMat,
    pub drift: CVec,
}

impl EvolutionSpec {
    /// Solves `ż = J(2Az + b)` exactly through the exponential of the
    /// augmented generator `[[2JA, Jb], [0, 0]]`.
    pub fn new(hamiltonian: QuadraticForm, t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(StargenError::InvalidConfig(format!("time must be finite, got {t}")));
        }
        let cfg = hamiltonian.config;
        let n = cfg.nvars();
        let j = symplectic_j(cfg.dim_n);
        let mut g = CMat::zeros(n + 1, n + 1);
        g.view_mut((0, 0), (n, n)).copy_from(&(&j * &hamiltonian.a * C64::new(2.0 * t, 0.0)));
        g.view_mut((0, n), (n, 1)).copy_from(&(&j * &hamiltonian.b * C64::new(t, 0.0)));
        let e = g.exp();
        let flow = e.view((0, 0), (n, n)).into_owned();
        let drift = e.view((0, n), (n, 1)).column(0).into_owned();
        let dev = symplectic_defect(&flow);
        if dev > SYMPLECTIC_TOL * max_abs(&flow).powi(2).max(1.0) {
            return Err(StargenError::Domain(format!("flow is not symplectic (deviation {dev:e})")));
        }
        Ok(Self { hamiltonian, t, flow, drift })
    }

    /// From a Hamiltonian symbol; anything beyond degree two is rejected.
    pub fn from_symbol(h: &PolySymbol, t: f64) -> Result<Self> {
        if h.degree() > 2 {
            return Err(StargenError::Unsupported("only quadratic Hamiltonians have an exact flow".into()));
        }
        Self::new(QuadraticForm::from_symbol(h)?, t)
    }

    /// `max |ΦᵀJΦ − J|`.
    pub fn symplectic_defect(&self) -> f64 {
        symplectic_defect(&self.flow)
    }
}

fn symplectic_defect(flow: &CMat) -> f64 {
    let j = symplectic_j(flow.nrows() / 2);
    max_abs(&(flow.transpose() * &j * flow - &j))
}

fn rows(m: &CMat) -> Vec<Vec<C64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// `A(z, t) = A(Φ z + d)`.
pub fn propagate_observable(a: &PolySymbol, spec: &EvolutionSpec) -> Result<PolySymbol> {
    if !a.config.compatible(&spec.hamiltonian.config) {
        return Err(StargenError::InvalidConfig("observable and Hamiltonian live on different phase spaces".into()));
    }
    let d: Vec<C64> = spec.drift.iter().copied().collect();
    Ok(a.compose_affine(&rows(&spec.flow), &d))
}

/// Applies the flow to every atom and kernel; eigenvalues are unchanged.
pub fn propagate_stargen(measure: &SpectralMeasure, spec: &EvolutionSpec) -> SpectralMeasure {
    measure.compose_affine(&spec.flow, &spec.drift)
}

/// `∫ f` on an automatic grid adapted to `f`'s Gaussian.
pub fn integrate_gauss(f: &GaussSymbol) -> Result<C64> {
    let grid = PhaseGrid::auto(f, TAIL, 0)?;
    integrate_on(&grid, f)
}

fn integrate_on(grid: &PhaseGrid, f: &GaussSymbol) -> Result<C64> {
    let v = grid.integrate(|z| f.eval(z).unwrap_or(C64::new(f64::NAN, 0.0)));
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(StargenError::Divergent("non-finite quadrature".into()));
    }
    Ok(v)
}

/// `P(𝒜 = a) = ∫ F^W Δ_*(𝒜 − a)`.
///
/// Discrete measures give the weight of the matching atom (zero if `a` is
/// not an eigenvalue); continuous ones give the density at `a`.
pub fn probability_of(fw: &GaussSymbol, measure: &SpectralMeasure, a: f64) -> Result<f64> {
    let norm = integrate_gauss(fw)?;
    if (norm - 1.0).norm() > 1e-6 {
        return Err(StargenError::Domain(format!("Wigner function is not normalized (∫F = {norm})")));
    }
    match measure.kind {
        MeasureKind::Discrete => match measure.find(a) {
            Some(atom) => Ok(integrate_gauss(&fw.mul(&atom.symbol))?.re),
            None => Ok(0.0),
        },
        MeasureKind::Continuous => {
            let kernel = measure
                .continuous
                .as_ref()
                .ok_or_else(|| StargenError::InvalidConfig("continuous measure without kernel".into()))?;
            let grid = PhaseGrid::auto(fw, TAIL, 0)?;
            let v = grid.integrate(|z| {
                fw.eval(z).unwrap_or(C64::new(f64::NAN, 0.0)) * kernel.eval(a, z).unwrap_or(C64::new(f64::NAN, 0.0))
            });
            if !v.re.is_finite() {
                return Err(StargenError::Divergent("non-finite density quadrature".into()));
            }
            Ok(v.re)
        }
    }
}

/// `(a_n, P(a_n))` for every atom, plus the weight `1 − Σ P` left to the
/// truncated tail.
pub fn probability_table(fw: &GaussSymbol, measure: &SpectralMeasure) -> Result<(Vec<(f64, f64)>, f64)> {
    if measure.kind != MeasureKind::Discrete {
        return Err(StargenError::Unsupported("probability tables need a discrete measure".into()));
    }
    let rows = measure
        .atoms
        .iter()
        .map(|atom| Ok((atom.eigenvalue, probability_of(fw, measure, atom.eigenvalue)?)))
        .collect::<Result<Vec<_>>>()?;
    let tail = 1.0 - rows.iter().map(|r| r.1).sum::<f64>();
    Ok((rows, tail))
}

/// `|∫(f ⋆ g) − ∫ f g|`, the trace identity behind the equivalence of the
/// two pictures.
pub fn trace_identity_check(f: &GaussSymbol, g: &GaussSymbol) -> Result<f64> {
    let prod = f.mul(g);
    let star = star_gauss(f, g)?;
    let divergent = |_| StargenError::Divergent("f·g does not decay".into());
    let grid = PhaseGrid::auto(&prod, TAIL, 0)
        .map_err(divergent)?
        .union(&PhaseGrid::auto(&star, TAIL, 0).map_err(divergent)?)?;
    let lhs = integrate_on(&grid, &star)?;
    let rhs = integrate_on(&grid, &prod)?;
    Ok((lhs - rhs).norm())
}

/// Riesz-weighted partial spectral sum `Σ_{n≤N} (1 − n/(N+1))² a_n C_n(z)`.
///
/// Plain partial sums of `Σ a_n C_n` diverge pointwise; second-order Riesz
/// means converge to `𝒜(z)` at rate `O(1/N)`.
pub fn spectral_resolution(measure: &SpectralMeasure, n_terms: usize, z: &[f64]) -> Result<C64> {
    if measure.kind != MeasureKind::Discrete {
        return Err(StargenError::Unsupported("spectral resolution needs a discrete measure".into()));
    }
    if n_terms > measure.atoms.len() {
        return Err(StargenError::Index(format!("measure has {} atoms, asked for {n_terms}", measure.atoms.len())));
    }
    let mut sum = C64::new(0.0, 0.0);
    for (n, atom) in measure.atoms.iter().take(n_terms).enumerate() {
        let w = (1.0 - n as f64 / n_terms as f64).powi(2);
        sum += atom.symbol.eval(z)? * (w * atom.eigenvalue);
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PhaseConfig;
    use crate::models::{energy_measure, ho1d_wigner, ModelId, ModelKind};
    use crate::symbols::Poly;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn oscillator_rotates_position() {
        let model = ModelId::unit(ModelKind::Ho1d);
        let t = 0.83;
        let spec = EvolutionSpec::new(model.quadratic_form(), t).unwrap();
        let q = PolySymbol::q(model.config, 0);
        let qt = propagate_observable(&q, &spec).unwrap();
        assert!((qt.poly.coeff(&[0, 1]) - c(t.cos(), 0.0)).norm() < 1e-15);
        assert!((qt.poly.coeff(&[1, 0]) - c(t.sin(), 0.0)).norm() < 1e-15);
        assert!(spec.symplectic_defect() < 1e-14);
    }

    #[test]
    fn zero_time_is_identity() {
        let model = ModelId::unit(ModelKind::Ho1d);
        let spec = EvolutionSpec::new(model.quadratic_form(), 0.0).unwrap();
        let h = model.hamiltonian();
        assert_eq!(propagate_observable(&h, &spec).unwrap(), h);
    }

    #[test]
    fn linear_potential_momentum_drifts() {
        let model = ModelId::unit(ModelKind::Linear);
        let spec = EvolutionSpec::new(model.quadratic_form(), 1.7).unwrap();
        let pt = propagate_observable(&PolySymbol::p(model.config, 0), &spec).unwrap();
        let want = PolySymbol::p(model.config, 0).add_const(c(-1.7, 0.0));
        assert!(pt.max_diff(&want) < 1e-14);
    }

    #[test]
    fn rejects_cubic_hamiltonian() {
        let cfg = PhaseConfig::unit(1);
        let q = PolySymbol::q(cfg, 0);
        assert!(EvolutionSpec::from_symbol(&q.pow(3), 1.0).is_err());
    }

    #[test]
    fn energy_atoms_are_invariant_and_round_trip() {
        let model = ModelId::unit(ModelKind::Ho1d);
        let m = energy_measure(&model, 3).unwrap();
        let fwd = EvolutionSpec::new(model.quadratic_form(), 1.3).unwrap();
        let back = EvolutionSpec::new(model.quadratic_form(), -1.3).unwrap();
        let moved = propagate_stargen(&m, &fwd);
        let rt = propagate_stargen(&moved, &back);
        let z = [0.4, -0.7];
        for ((a, b), c0) in moved.atoms.iter().zip(&rt.atoms).zip(&m.atoms) {
            assert!((a.symbol.eval(&z).unwrap() - c0.symbol.eval(&z).unwrap()).norm() < 1e-12);
            assert!((b.symbol.eval(&z).unwrap() - c0.symbol.eval(&z).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn ground_state_probabilities() {
        let model = ModelId::unit(ModelKind::Ho1d);
        let m = energy_measure(&model, 4).unwrap();
        let f0 = ho1d_wigner(model.config, 0, 0).unwrap();
        assert!((probability_of(&f0, &m, 0.5).unwrap() - 1.0).abs() < 1e-10);
        assert!(probability_of(&f0, &m, 1.5).unwrap().abs() < 1e-10);
        assert_eq!(probability_of(&f0, &m, 0.7).unwrap(), 0.0);
        let mix = f0.add(&ho1d_wigner(model.config, 1, 1).unwrap()).unwrap().scale(c(0.5, 0.0));
        assert!((probability_of(&mix, &m, 0.5).unwrap() - 0.5).abs() < 1e-10);
        let (rows, tail) = probability_table(&mix, &m).unwrap();
        assert_eq!(rows.len(), 5);
        assert!(tail.abs() < 1e-10);
    }

    #[test]
    fn unnormalized_state_is_rejected() {
        let model = ModelId::unit(ModelKind::Ho1d);
        let m = energy_measure(&model, 2).unwrap();
        let f0 = ho1d_wigner(model.config, 0, 0).unwrap().scale(c(2.0, 0.0));
        assert!(probability_of(&f0, &m, 0.5).is_err());
    }

    #[test]
    fn trace_identity_pairs() {
        let cfg = PhaseConfig::unit(1);
        let f0 = ho1d_wigner(cfg, 0, 0).unwrap();
        let f1 = ho1d_wigner(cfg, 1, 1).unwrap();
        assert!(trace_identity_check(&f0, &f0).unwrap() < 1e-10);
        let d = trace_identity_check(&f0, &f1).unwrap();
        assert!(d < 1e-10, "{d}");
        let one = GaussSymbol::from_poly(PolySymbol::one(cfg));
        assert!(trace_identity_check(&one, &f1).unwrap() < 1e-10);
        let flat = GaussSymbol::from_poly(PolySymbol::new(cfg, Poly::constant(2, c(1.0, 0.0))).unwrap());
        assert!(trace_identity_check(&flat, &flat).is_err());
    }

    #[test]
    fn riesz_resolution_improves() {
        let model = ModelId::unit(ModelKind::Ho1d);
        let m = energy_measure(&model, 32).unwrap();
        let h = model.hamiltonian();
        let mut prev = f64::INFINITY;
        for n in [8usize, 16, 32] {
            let mut err = 0.0f64;
            for i in 0..=20 {
                let hv = 2.0 * i as f64 / 20.0;
                let z = [0.0, (2.0 * hv).sqrt()];
                err = err.max((spectral_resolution(&m, n, &z).unwrap() - h.eval(&z).unwrap()).norm());
            }
            assert!(err < prev, "N = {n}: {err} ≥ {prev}");
            prev = err;
        }
    }
}
