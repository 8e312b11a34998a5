//! Randomized invariants of the star product, the quadratic star-exponential,
//! the oscillator stargenfunctions and the quadratic flow.

use std::f64::consts::PI;

use proptest::prelude::*;
use stargen::evolve::{probability_of, propagate_stargen, EvolutionSpec};
use stargen::linalg::{asymmetry, cos_sin, inverse, symplectic_j, CMat, CVec};
use stargen::models::{self, ModelId, ModelKind};
use stargen::quad_star::star_exp_quadratic_with;
use stargen::symbols::star_poly_orders;
use stargen::{
    factor_sa, moyal_bracket, star_exp_quadratic, star_exp_series, star_gauss, star_poly, star_poly_right,
    symplectic_scale, FactorMethod, GaussSymbol, PhaseConfig, Poly, PolySymbol, QuadraticForm, ScaleKind, C64,
};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn coeff() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c(a, b))
}

/// Random polynomial in `(p, q)` of total degree at most `deg`.
fn poly2(deg: u32) -> impl Strategy<Value = Poly> {
    let monomials: Vec<Vec<u32>> = (0..=deg).flat_map(|d| (0..=d).map(move |i| vec![i, d - i])).collect();
    let n = monomials.len();
    (proptest::collection::vec(coeff(), n), proptest::collection::vec(any::<bool>(), n)).prop_map(move |(cs, keep)| {
        Poly::from_terms(2, monomials.iter().zip(cs).zip(keep).filter(|(_, k)| *k).map(|((e, c), _)| (e.clone(), c)))
    })
}

fn sym(cfg: PhaseConfig, p: Poly) -> PolySymbol {
    PolySymbol { config: cfg, poly: p }
}

fn rel_diff(a: &PolySymbol, b: &PolySymbol) -> f64 {
    a.max_diff(b) / a.poly.max_coeff().max(b.poly.max_coeff()).max(1.0)
}

/// Order `s` of the Moyal expansion for one degree of freedom, written out
/// directly: `(iħ/2)^s/s! Σ_j C(s,j)(−1)^j ∂_q^{s−j}∂_p^j a · ∂_p^{s−j}∂_q^j b`.
fn moyal_order(a: &Poly, b: &Poly, s: u32, hbar: f64) -> Poly {
    let mut acc = Poly::zero(2);
    let mut binom = 1.0;
    for j in 0..=s {
        let da = a.derivative_multi(&[j, s - j]);
        let db = b.derivative_multi(&[s - j, j]);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc = acc.add(&da.mul(&db).scale(c(sign * binom, 0.0)));
        binom = binom * (s - j) as f64 / (j + 1) as f64;
    }
    let fact: f64 = (1..=s).map(f64::from).product();
    acc.scale(c(0.0, hbar / 2.0).powu(s) / fact)
}

fn grid11(r: f64) -> Vec<[f64; 2]> {
    let h = 2.0 * r / 10.0;
    (0..11).flat_map(|i| (0..11).map(move |j| [-r + i as f64 * h, -r + j as f64 * h])).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn product_matches_written_out_expansion_and_truncates(a in poly2(4), b in poly2(4), hbar in 0.1..2.0f64) {
        let cfg = PhaseConfig::unit(1).with_hbar(hbar);
        let (sa, sb) = (sym(cfg, a.clone()), sym(cfg, b.clone()));
        let d = a.degree();
        let orders = star_poly_orders(&sa, &sb).unwrap();
        prop_assert!(orders.len() <= d as usize + 1);
        for (s, o) in orders.iter().enumerate() {
            let want = sym(cfg, moyal_order(&a, &b, s as u32, hbar));
            prop_assert!(rel_diff(o, &want) < 1e-13);
        }
        prop_assert!(moyal_order(&a, &b, d + 1, hbar).is_zero());
        let mut total = Poly::zero(2);
        for s in 0..=d {
            total = total.add(&moyal_order(&a, &b, s, hbar));
        }
        prop_assert!(rel_diff(&star_poly(&sa, &sb).unwrap(), &sym(cfg, total)) < 1e-13);
    }

    #[test]
    fn associativity(a in poly2(4), b in poly2(4), d in poly2(4)) {
        let cfg = PhaseConfig::unit(1).with_hbar(0.7);
        let (a, b, d) = (sym(cfg, a), sym(cfg, b), sym(cfg, d));
        let left = star_poly(&star_poly(&a, &b).unwrap(), &d).unwrap();
        let right = star_poly(&a, &star_poly(&b, &d).unwrap()).unwrap();
        prop_assert!(rel_diff(&left, &right) < 1e-12, "{}", left.max_diff(&right));
    }

    #[test]
    fn conjugation_reverses_order(a in poly2(4), b in poly2(4), hbar in 0.1..2.0f64) {
        let cfg = PhaseConfig::unit(1).with_hbar(hbar);
        let (a, b) = (sym(cfg, a), sym(cfg, b));
        let lhs = star_poly(&a, &b).unwrap().conj();
        let rhs = star_poly(&b.conj(), &a.conj()).unwrap();
        prop_assert!(rel_diff(&lhs, &rhs) < 1e-13);
    }

    #[test]
    fn classical_limit(a in poly2(4), b in poly2(4)) {
        let hbar = 1e-9;
        let cfg = PhaseConfig::unit(1).with_hbar(hbar);
        let (a, b) = (sym(cfg, a), sym(cfg, b));
        let diff = star_poly(&a, &b).unwrap().max_diff(&a.mul(&b));
        // the first correction is bounded by ħ/2 · 2 · (4·4) · #terms² with unit coefficients
        prop_assert!(diff <= hbar * 16.0 * 15.0 * 15.0, "{diff}");
    }

    #[test]
    fn quadratic_moyal_is_poisson(a in poly2(2), b in poly2(2), hbar in 0.1..3.0f64) {
        let cfg = PhaseConfig::unit(1).with_hbar(hbar);
        let (sa, sb) = (sym(cfg, a.clone()), sym(cfg, b.clone()));
        // {a, b} = ∂_q a ∂_p b − ∂_p a ∂_q b with z = (p, q)
        let poisson = a.derivative(1).mul(&b.derivative(0)).sub(&a.derivative(0).mul(&b.derivative(1)));
        let moyal = moyal_bracket(&sa, &sb).unwrap();
        prop_assert!(rel_diff(&moyal, &sym(cfg, poisson)) < 1e-14);
    }

    #[test]
    fn gaussian_product_agrees_with_polynomial_product(
        a in poly2(3),
        pre in poly2(2),
        m11 in 0.3..1.5f64, m22 in 0.3..1.5f64, m12 in -0.2..0.2f64, im in -0.3..0.3f64,
        v0 in -0.5..0.5f64, v1 in -0.5..0.5f64,
    ) {
        let cfg = PhaseConfig::unit(1);
        let m = CMat::from_row_slice(2, 2, &[c(-m11, im), c(m12, 0.0), c(m12, 0.0), c(-m22, -im)]);
        let g = GaussSymbol::new(sym(cfg, pre.add(&Poly::one(2))), m, CVec::from_vec(vec![c(v0, 0.0), c(0.0, v1)]), c(0.0, 0.0)).unwrap();
        let sa = sym(cfg, a);
        let via_gauss = star_gauss(&GaussSymbol::from_poly(sa.clone()), &g).unwrap();
        let via_poly = star_poly(&sa, &g).unwrap();
        let via_gauss_r = star_gauss(&g, &GaussSymbol::from_poly(sa.clone())).unwrap();
        let via_poly_r = star_poly_right(&g, &sa).unwrap();
        for z in grid11(2.0) {
            let (x, y) = (via_gauss.eval(&z).unwrap(), via_poly.eval(&z).unwrap());
            prop_assert!((x - y).norm() <= 1e-12 * x.norm().max(1.0));
            let (x, y) = (via_gauss_r.eval(&z).unwrap(), via_poly_r.eval(&z).unwrap());
            prop_assert!((x - y).norm() <= 1e-12 * x.norm().max(1.0));
        }
    }
}

fn form_1d(cfg: PhaseConfig, a: [f64; 3], b: [f64; 2], k: f64) -> QuadraticForm {
    let m = CMat::from_row_slice(2, 2, &[c(a[0], 0.0), c(a[1], 0.0), c(a[1], 0.0), c(a[2], 0.0)]);
    QuadraticForm::new(cfg, m, CVec::from_vec(vec![c(b[0], 0.0), c(b[1], 0.0)])).unwrap().with_constant(c(k, 0.0))
}

fn nonsingular_form() -> impl Strategy<Value = QuadraticForm> {
    (proptest::array::uniform3(-1.0..1.0f64), proptest::array::uniform2(-1.0..1.0f64), -1.0..1.0f64, 0.3..1.5f64)
        .prop_filter("det(A) bounded away from zero", |(a, ..)| (a[0] * a[2] - a[1] * a[1]).abs() > 0.1)
        .prop_map(|(a, b, k, hbar)| form_1d(PhaseConfig::unit(1).with_hbar(hbar), a, b, k))
}

fn small_beta(max: f64) -> impl Strategy<Value = C64> {
    (0.0..max, 0.0..2.0 * PI).prop_map(|(r, th)| C64::from_polar(r, th))
}

/// Random real symplectic matrix `exp(J S)` for symmetric `S`.
fn symplectic(n: usize, entries: &[f64]) -> CMat {
    let dim = 2 * n;
    let mut s = CMat::zeros(dim, dim);
    let mut it = entries.iter();
    for i in 0..dim {
        for j in i..dim {
            let v = c(*it.next().unwrap(), 0.0);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    (symplectic_j(n) * s).exp()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn theorem_matches_series(qf in nonsingular_form(), beta in small_beta(0.2)) {
        let closed = star_exp_quadratic(&qf, beta).unwrap();
        let series = star_exp_series(&qf.to_symbol(), beta, 20).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let z = [-1.0 + 0.5 * i as f64, -1.0 + 0.5 * j as f64];
                let (x, y) = (closed.eval(&z).unwrap(), series.eval(&z).unwrap());
                prop_assert!((x - y).norm() < 1e-8 * x.norm());
            }
        }
    }

    #[test]
    fn exponent_matrix_is_symmetric(qf in nonsingular_form(), beta in small_beta(1.0)) {
        let cfg = qf.config;
        let fact = factor_sa(&qf, FactorMethod::Diagonalization).unwrap();
        let j = symplectic_j(cfg.dim_n);
        let s = &fact.s;
        let b = &j * s * &j * s.transpose() * &j * (beta * cfg.hbar);
        let (cos_b, sin_b) = cos_sin(&b);
        let tan_b = sin_b * inverse(&cos_b, "cos B").unwrap();
        let lambda = -(&j * inverse(s, "S").unwrap() * &j * tan_b * &j * s) / c(cfg.hbar, 0.0);
        let scale = lambda.iter().map(|x| x.norm()).fold(1.0, f64::max);
        prop_assert!(asymmetry(&lambda) < 1e-11 * scale, "{}", asymmetry(&lambda));
    }

    #[test]
    fn closed_form_solves_the_flow_equation(qf in nonsingular_form(), beta in small_beta(0.5)) {
        let h = 1e-3;
        let at = |db: f64| star_exp_quadratic(&qf, beta + db).unwrap();
        let (m2, m1, p1, p2) = (at(-2.0 * h), at(-h), at(h), at(2.0 * h));
        let rhs = star_poly(&qf.to_symbol(), &at(0.0)).unwrap();
        for z in grid11(1.0).iter().step_by(4) {
            let e = |g: &GaussSymbol| g.eval(z).unwrap();
            let deriv = (e(&m2) - e(&p2) + 8.0 * (e(&p1) - e(&m1))) / (12.0 * h);
            let want = rhs.eval(z).unwrap();
            prop_assert!((deriv - want).norm() < 1e-8 * want.norm().max(1.0), "{deriv} vs {want}");
        }
    }

    #[test]
    fn group_law(qf in nonsingular_form(), b1 in small_beta(0.3), b2 in small_beta(0.3)) {
        let g1 = star_exp_quadratic(&qf, b1).unwrap();
        let g2 = star_exp_quadratic(&qf, b2).unwrap();
        let prod = star_gauss(&g1, &g2).unwrap();
        let direct = star_exp_quadratic(&qf, b1 + b2).unwrap();
        for z in grid11(1.0) {
            let (x, y) = (prod.eval(&z).unwrap(), direct.eval(&z).unwrap());
            prop_assert!((x - y).norm() < 1e-8 * y.norm().max(1.0));
        }
    }

    #[test]
    fn factorization_choice_does_not_matter(
        a in proptest::array::uniform3(-1.0..1.0f64),
        im in proptest::array::uniform3(-0.3..0.3f64),
        beta in small_beta(0.4),
    ) {
        let cfg = PhaseConfig::unit(1);
        let m = CMat::from_row_slice(2, 2, &[c(1.5 + a[0], im[0]), c(a[1] * 0.5, im[1]), c(a[1] * 0.5, im[1]), c(1.5 + a[2], im[2])]);
        let qf = QuadraticForm::new(cfg, m, CVec::from_vec(vec![c(0.2, 0.0), c(-0.4, 0.0)])).unwrap();
        let diag = factor_sa(&qf, FactorMethod::Diagonalization).unwrap();
        let chol = factor_sa(&qf, FactorMethod::ComplexCholesky).unwrap();
        let g1 = star_exp_quadratic_with(&qf, &diag, beta).unwrap();
        let g2 = star_exp_quadratic_with(&qf, &chol, beta).unwrap();
        for z in grid11(1.5) {
            let (x, y) = (g1.eval(&z).unwrap(), g2.eval(&z).unwrap());
            prop_assert!((x - y).norm() < 1e-10 * x.norm().max(1.0));
        }
    }

    #[test]
    fn hermitean_proportional_alpha_is_real_or_imaginary(
        two_dims in any::<bool>(),
        entries in proptest::collection::vec(-0.4..0.4f64, 10),
        scale in 0.2..2.0f64,
        inverted in any::<bool>(),
    ) {
        let n = if two_dims { 2 } else { 1 };
        let cfg = PhaseConfig::unit(n);
        let m = symplectic(n, &entries);
        let mut d = CMat::identity(2 * n, 2 * n) * c(scale, 0.0);
        if inverted {
            for i in n..2 * n {
                d[(i, i)] = c(-scale, 0.0);
            }
        }
        let a = m.transpose() * d * &m;
        let a = (&a + a.transpose()) * c(0.5, 0.0);
        let qf = QuadraticForm::new(cfg, a, CVec::zeros(2 * n)).unwrap();
        let fact = factor_sa(&qf, FactorMethod::Diagonalization).unwrap();
        let sc = symplectic_scale(&qf, &fact).unwrap();
        prop_assert!(sc.is_proportional());
        prop_assert!((sc.alpha.re * sc.alpha.im).abs() < 1e-9);
        let want = if inverted { ScaleKind::ImaginaryAlpha } else { ScaleKind::RealAlpha };
        prop_assert_eq!(sc.kind, want);
        prop_assert!((sc.alpha.norm() - scale).abs() < 1e-9 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn oscillator_functions_conjugate_to_transpose(
        n in 0u32..8, m in 0u32..8,
        hbar in 0.3..2.0f64, mass in 0.5..2.0f64, omega in 0.5..2.0f64,
        p in -3.0..3.0f64, q in -3.0..3.0f64,
    ) {
        let cfg = PhaseConfig::new(1, hbar, mass, omega).unwrap();
        let f = models::ho1d_wigner(cfg, n, m).unwrap();
        let g = models::ho1d_wigner(cfg, m, n).unwrap();
        let (x, y) = (f.eval(&[p, q]).unwrap().conj(), g.eval(&[p, q]).unwrap());
        prop_assert!((x - y).norm() <= 1e-14 * x.norm().max(1e-14));
    }

    #[test]
    fn translation_symbol_commutators(hbar in 0.3..2.0f64, mass in 0.5..2.0f64, omega in 0.5..2.0f64) {
        let cfg = PhaseConfig::new(2, hbar, mass, omega).unwrap();
        let model = ModelId::new(ModelKind::Ho2d, hbar, mass, omega).unwrap();
        let (h, l3, t) = (model.hamiltonian(), models::l3(cfg), models::t_symbol(cfg));
        let comm = |a: &PolySymbol, b: &PolySymbol| star_poly(a, b).unwrap().sub(&star_poly(b, a).unwrap());
        prop_assert!(rel_diff(&comm(&l3, &t), &t.scale(c(2.0 * hbar, 0.0))) < 1e-13);
        prop_assert!(comm(&h, &t).poly.max_coeff() < 1e-12 * t.poly.max_coeff().max(1.0));
    }

    #[test]
    fn probability_is_conserved_under_oscillator_flow(
        t in -10.0..10.0f64,
        squeeze in 0.4..2.5f64,
        q0 in -1.5..1.5f64, p0 in -1.5..1.5f64,
    ) {
        let model = ModelId::unit(ModelKind::Ho1d);
        let cfg = model.config;
        // (1/π) exp(−(p − p0)² s − (q − q0)²/s)
        let m = CMat::from_row_slice(2, 2, &[c(-squeeze, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0 / squeeze, 0.0)]);
        let v = CVec::from_vec(vec![c(2.0 * p0 * squeeze, 0.0), c(2.0 * q0 / squeeze, 0.0)]);
        let k = -p0 * p0 * squeeze - q0 * q0 / squeeze - PI.ln();
        let fw = GaussSymbol::pure(cfg, m, v, c(k, 0.0)).unwrap();
        let measure = models::energy_measure(&model, 6).unwrap();
        let spec = EvolutionSpec::new(model.quadratic_form(), t).unwrap();
        prop_assert!(spec.symplectic_defect() < 1e-10);
        let moved = propagate_stargen(&measure, &spec);
        for n in 0..=6 {
            let e = n as f64 + 0.5;
            let (a, b) = (probability_of(&fw, &measure, e).unwrap(), probability_of(&fw, &moved, e).unwrap());
            prop_assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn symbols_round_trip_through_json(a in poly2(5), hbar in 0.1..3.0f64, m11 in 0.1..2.0f64, off in -0.5..0.5f64) {
        let cfg = PhaseConfig::unit(1).with_hbar(hbar);
        let s = sym(cfg, a);
        prop_assert_eq!(&PolySymbol::from_json(&s.to_json()).unwrap(), &s);
        let m = CMat::from_row_slice(2, 2, &[c(-m11, off), c(off, 0.0), c(off, 0.0), c(-1.0, -off)]);
        let g = GaussSymbol::new(s, m, CVec::from_vec(vec![c(off, 0.1), c(0.0, off)]), c(off, hbar)).unwrap();
        prop_assert_eq!(&GaussSymbol::from_json(&g.to_json()).unwrap(), &g);
    }
}

#[test]
fn diagonal_family_matches_closed_form() {
    let cfg = PhaseConfig::new(1, 0.7, 1.3, 0.9).unwrap();
    let model = ModelId::new(ModelKind::Ho1d, 0.7, 1.3, 0.9).unwrap();
    let measure = models::energy_measure(&model, 8).unwrap();
    for (n, atom) in measure.atoms.iter().enumerate() {
        let closed = models::ho1d_wigner(cfg, n as u32, n as u32).unwrap();
        let w = atom.wigner();
        let scale = closed.prefactor.poly.max_coeff();
        assert!(w.prefactor.max_diff(&closed.prefactor) < 1e-13 * scale, "n = {n}");
        assert!((&w.m - &closed.m).iter().all(|x| x.norm() < 1e-14));
        assert!((w.c - closed.c).norm() < 1e-14);
    }
}
