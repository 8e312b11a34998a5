//! Special functions: Laguerre polynomials, the Airy function, the confluent
//! hypergeometric function and the complex gamma function.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Result, StargenError};

/// Largest degree or order accepted by the Laguerre evaluators.
pub const LAGUERRE_MAX: u32 = 200;

/// `Lₙ^α(x)` by the three-term recurrence.
pub fn laguerre(n: u32, alpha: u32, x: f64) -> f64 {
    let a = alpha as f64;
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + a - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Power-series coefficients `c_k` with `Lₙ^α(x) = Σ c_k x^k`.
pub fn laguerre_coefficients(n: u32, alpha: u32) -> Vec<f64> {
    let a = alpha as f64;
    let mut c = Vec::with_capacity(n as usize + 1);
    let mut ck: f64 = (1..=n).map(|j| (a + j as f64) / j as f64).product();
    for k in 0..=n {
        c.push(ck);
        let kf = k as f64;
        ck *= -((n - k) as f64) / ((kf + a + 1.0) * (kf + 1.0));
    }
    c
}

/// Trapezoid quadrature of the contour representation
/// `Lₙ^α(x) = ((−1)ⁿ/2πi) ∮ z^{−2n−1} (z²+1)^{−α−1} exp(x z²/(z²+1)) dz`
/// on a circle of the given radius.
pub fn laguerre_contour(n: u32, alpha: u32, x: f64, radius: f64, n_quad: usize) -> Result<f64> {
    if !(radius > 0.0 && radius < 1.0) {
        return Err(StargenError::Domain(format!(
            "contour radius must lie in (0, 1) to enclose 0 and exclude ±i, got {radius}"
        )));
    }
    if n_quad < 64 {
        return Err(StargenError::Domain(format!("need at least 64 quadrature nodes, got {n_quad}")));
    }
    let one = C64::new(1.0, 0.0);
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n_quad {
        let theta = 2.0 * PI * j as f64 / n_quad as f64;
        let z = C64::from_polar(radius, theta);
        let z2 = z * z;
        let w = z2 + one;
        acc += z.powi(-(2 * n as i32)) * w.powi(-(alpha as i32) - 1) * (z2 * x / w).exp();
    }
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * acc.re / n_quad as f64)
}

/// Contour evaluation at radius 0.5, doubling the node count from 512
/// until two successive results agree to `1e-11`.
pub fn laguerre_contour_adaptive(n: u32, alpha: u32, x: f64) -> Result<f64> {
    let mut m = 512;
    let mut prev = laguerre_contour(n, alpha, x, 0.5, m)?;
    loop {
        m *= 2;
        let cur = laguerre_contour(n, alpha, x, 0.5, m)?;
        if (cur - prev).abs() <= 1e-11 * prev.abs().max(1.0) || m >= 1 << 16 {
            return Ok(cur);
        }
        prev = cur;
    }
}

const AI0: f64 = 0.355_028_053_887_817_2;
const AIP0: f64 = -0.258_819_403_792_806_8;

/// `Ai(x)` for real `x`.
pub fn airy(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(StargenError::Domain(format!("Airy argument must be finite, got {x}")));
    }
    Ok(airy_pair(x).0)
}

/// `(Ai(x), Ai'(x))`.
///
/// Maclaurin series for `|x| ≤ 2`, asymptotic expansions for `|x| ≥ 10`,
/// and Taylor continuation of the ODE `y'' = x y` in between (towards
/// smaller `x` on the positive side, where that direction is stable).
pub fn airy_pair(x: f64) -> (f64, f64) {
    if x.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    if x.abs() <= 2.0 {
        airy_maclaurin(x)
    } else if x >= 10.0 {
        airy_asymptotic_pos(x)
    } else if x > 2.0 {
        let (y, yp) = airy_asymptotic_pos(10.0);
        airy_continue(10.0, y, yp, x)
    } else if x <= -10.0 {
        airy_asymptotic_neg(-x)
    } else {
        let (y, yp) = airy_maclaurin(-2.0);
        airy_continue(-2.0, y, yp, x)
    }
}

fn airy_maclaurin(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    // f = Σ 3^k (1/3)_k x^{3k}/(3k)!, g = Σ 3^k (2/3)_k x^{3k+1}/(3k+1)!
    let (mut f, mut g) = (1.0, x);
    let (mut tf, mut tg) = (1.0, x);
    let (mut fp, mut gp) = (0.0, 1.0);
    let (mut tfp, mut tgp) = (x * x / 2.0, 1.0);
    fp += tfp;
    for k in 0..60 {
        let kf = k as f64;
        tf *= x3 / ((3.0 * kf + 2.0) * (3.0 * kf + 3.0));
        tg *= x3 / ((3.0 * kf + 3.0) * (3.0 * kf + 4.0));
        tgp *= x3 / ((3.0 * kf + 3.0) * (3.0 * kf + 1.0));
        if k > 0 {
            tfp *= x3 / ((3.0 * kf + 2.0) * (3.0 * kf));
            fp += tfp;
        }
        f += tf;
        g += tg;
        gp += tgp;
        if tf.abs() + tg.abs() + tfp.abs() + tgp.abs() < 1e-18 * (f.abs() + g.abs() + 1e-300) && k > 2 {
            break;
        }
    }
    (AI0 * f + AIP0 * g, AI0 * fp + AIP0 * gp)
}

fn airy_u_coeffs(count: usize) -> Vec<f64> {
    let mut u = vec![1.0];
    for k in 1..count {
        let kf = k as f64;
        let prev = u[k - 1];
        u.push(prev * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf));
    }
    u
}

fn airy_v_from_u(u: &[f64]) -> Vec<f64> {
    u.iter().enumerate().map(|(k, uk)| -(6.0 * k as f64 + 1.0) / (6.0 * k as f64 - 1.0) * uk).collect()
}

/// Asymptotic sum `Σ s_k c_k ζ^{-k}` stopped at the smallest term.
fn asym_sum(c: &[f64], zeta: f64, sign_of: impl Fn(usize) -> f64, ks: impl Iterator<Item = usize>) -> f64 {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    for k in ks {
        let term = sign_of(k) * c[k] * zeta.powi(-(k as i32));
        if term.abs() > last {
            break;
        }
        sum += term;
        last = term.abs();
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn airy_asymptotic_pos(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let u = airy_u_coeffs(40);
    let v = airy_v_from_u(&u);
    let alt = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let su = asym_sum(&u, zeta, alt, 0..40);
    let sv = asym_sum(&v, zeta, alt, 0..40);
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    let x4 = x.powf(0.25);
    (e / x4 * su, -e * x4 * sv)
}

fn airy_asymptotic_neg(y: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * y.powf(1.5);
    let u = airy_u_coeffs(60);
    let v = airy_v_from_u(&u);
    let alt_pair = |k: usize| if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    let pu = asym_sum(&u, zeta, alt_pair, (0..60).step_by(2));
    let qu = asym_sum(&u, zeta, alt_pair, (1..60).step_by(2));
    let pv = asym_sum(&v, zeta, alt_pair, (0..60).step_by(2));
    let qv = asym_sum(&v, zeta, alt_pair, (1..60).step_by(2));
    let (s, c) = (zeta - PI / 4.0).sin_cos();
    let y4 = y.powf(0.25);
    let ai = (c * pu + s * qu) / (PI.sqrt() * y4);
    let aip = y4 / PI.sqrt() * (s * pv - c * qv);
    (ai, aip)
}

/// Integrates `y'' = x y` from `x0` to `x1` by Taylor steps of at most 0.25.
fn airy_continue(x0: f64, mut y: f64, mut yp: f64, x1: f64) -> (f64, f64) {
    let steps = ((x1 - x0).abs() / 0.25).ceil().max(1.0) as usize;
    let h = (x1 - x0) / steps as f64;
    let mut x = x0;
    for _ in 0..steps {
        // e_n = y^{(n)}(x)/n!, e_{n+2} = (x e_n + e_{n-1}) / ((n+1)(n+2))
        let mut e = [y, yp, 0.5 * x * y];
        let mut val = e[0] + e[1] * h + e[2] * h * h;
        let mut der = e[1] + 2.0 * e[2] * h;
        let mut hp = h * h;
        for n in 1..80usize {
            let next = (x * e[1] + e[0]) / ((n + 1) as f64 * (n + 2) as f64);
            e = [e[1], e[2], next];
            hp *= h;
            let tv = next * hp;
            let td = (n + 2) as f64 * next * hp / h;
            val += tv;
            der += td;
            if tv.abs() + td.abs() < 1e-18 * (val.abs() + der.abs()) {
                break;
            }
        }
        y = val;
        yp = der;
        x += h;
    }
    (y, yp)
}

/// Double-double arithmetic for cancellation-prone series.
#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
    fn quick(a: f64, b: f64) -> Self {
        let s = a + b;
        Dd { hi: s, lo: b - (s - a) }
    }
    fn add(self, o: Dd) -> Dd {
        let s = self.hi + o.hi;
        let bb = s - self.hi;
        let e = (self.hi - (s - bb)) + (o.hi - bb) + self.lo + o.lo;
        Dd::quick(s, e)
    }
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
    fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }
    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p) + self.hi * o.lo + self.lo * o.hi;
        Dd::quick(p, e)
    }
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::from(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(Dd::from(q2)));
        let q3 = r.hi / o.hi;
        Dd::quick(q1, q2).add(Dd::from(q3))
    }
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

#[derive(Clone, Copy, Debug)]
struct DdC {
    re: Dd,
    im: Dd,
}

impl DdC {
    fn from(z: C64) -> Self {
        DdC { re: Dd::from(z.re), im: Dd::from(z.im) }
    }
    fn add(self, o: DdC) -> DdC {
        DdC { re: self.re.add(o.re), im: self.im.add(o.im) }
    }
    fn mul(self, o: DdC) -> DdC {
        DdC { re: self.re.mul(o.re).sub(self.im.mul(o.im)), im: self.re.mul(o.im).add(self.im.mul(o.re)) }
    }
    fn div(self, o: DdC) -> DdC {
        let den = o.re.mul(o.re).add(o.im.mul(o.im));
        let num = self.mul(DdC { re: o.re, im: o.im.neg() });
        DdC { re: num.re.div(den), im: num.im.div(den) }
    }
    fn to_c64(self) -> C64 {
        C64::new(self.re.to_f64(), self.im.to_f64())
    }
    fn norm(self) -> f64 {
        self.to_c64().norm()
    }
}

fn is_nonpositive_integer(z: C64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0
}

/// Confluent hypergeometric `₁F₁(a; b; z)`.
///
/// Power series summed in double-double arithmetic (term-ratio stopping at
/// relative `1e-14`) for `|z| ≤ 50`; the large-`|z|` asymptotic expansion
/// beyond.
pub fn hyp1f1(a: C64, b: C64, z: C64) -> Result<C64> {
    if is_nonpositive_integer(b) {
        return Err(StargenError::Domain(format!("1F1 lower parameter {b} is a pole")));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(StargenError::Domain("1F1 argument must be finite".into()));
    }
    if z.norm() <= 50.0 {
        hyp1f1_series(a, b, z)
    } else {
        hyp1f1_asymptotic(a, b, z)
    }
}

fn hyp1f1_series(a: C64, b: C64, z: C64) -> Result<C64> {
    let zd = DdC::from(z);
    let mut term = DdC::from(C64::new(1.0, 0.0));
    let mut sum = term;
    let peak = a.norm() + z.norm() + 2.0;
    for k in 0..100_000usize {
        let kf = k as f64;
        let ak = DdC { re: Dd::from(a.re).add(Dd::from(kf)), im: Dd::from(a.im) };
        let bk = DdC { re: Dd::from(b.re).add(Dd::from(kf)), im: Dd::from(b.im) };
        let den = bk.mul(DdC::from(C64::new(kf + 1.0, 0.0)));
        term = term.mul(ak).mul(zd).div(den);
        sum = sum.add(term);
        let t = term.norm();
        if t == 0.0 || (kf > peak && t <= 1e-14 * 1e-3 * sum.norm()) {
            return Ok(sum.to_c64());
        }
    }
    Err(StargenError::Domain("1F1 series did not converge".into()))
}

fn hyp1f1_asymptotic(a: C64, b: C64, z: C64) -> Result<C64> {
    let one = C64::new(1.0, 0.0);
    let series = |x: C64, y: C64, w: C64| -> C64 {
        // Σ (x)_s (y)_s / s! w^{-s}, stopped at the smallest term.
        let mut t = one;
        let mut s = one;
        let mut last = f64::INFINITY;
        for k in 0..200 {
            let kf = k as f64;
            t = t * (x + kf) * (y + kf) / ((kf + 1.0) * w);
            let tn = t.norm();
            if tn > last {
                break;
            }
            s += t;
            last = tn;
            if tn < 1e-17 * s.norm() {
                break;
            }
        }
        s
    };
    let arg = z.arg();
    let phase = if arg > -PI / 2.0 { C64::new(0.0, PI) * a } else { C64::new(0.0, -PI) * a };
    let lnz = z.ln();
    let first = (phase - a * lnz).exp() * rgamma(b - a)? * series(a, a - b + one, -z);
    let second = (z + (a - b) * lnz).exp() * rgamma(a)? * series(b - a, one - a, z);
    Ok(gamma_complex(b)? * (first + second))
}

/// `1/Γ(z)`, zero at the poles.
fn rgamma(z: C64) -> Result<C64> {
    if is_nonpositive_integer(z) {
        Ok(C64::new(0.0, 0.0))
    } else {
        Ok(C64::new(1.0, 0.0) / gamma_complex(z)?)
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `Γ(z)` for complex `z` (Lanczos approximation with reflection).
pub fn gamma_complex(z: C64) -> Result<C64> {
    if is_nonpositive_integer(z) {
        return Err(StargenError::Domain(format!("gamma has a pole at {z}")));
    }
    Ok(gamma_inner(z))
}

fn gamma_inner(z: C64) -> C64 {
    if z.re < 0.5 {
        let s = (C64::new(PI, 0.0) * z).sin();
        return C64::new(PI, 0.0) / (s * gamma_inner(C64::new(1.0, 0.0) - z));
    }
    let z = z - 1.0;
    let mut x = C64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += *c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    ((z + 0.5) * t.ln() - t).exp() * x * (2.0 * PI).sqrt()
}

/// `n!` as a float.
pub fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}
