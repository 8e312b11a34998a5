//! Rectangular phase-space grids, parallel evaluation and midpoint quadrature.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PhaseConfig;
use crate::error::{Result, StargenError};
use crate::linalg::{eigenvalues, inverse, CVec};
use crate::symbols::{GaussSymbol, Poly};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && step.is_finite()) {
            return Err(StargenError::InvalidConfig("grid bounds must be finite".into()));
        }
        if step <= 0.0 {
            return Err(StargenError::InvalidConfig(format!("grid step must be positive, got {step}")));
        }
        if max <= min {
            return Err(StargenError::InvalidConfig(format!("empty grid range {min}:{max}")));
        }
        Ok(Self { min, max, step })
    }

    /// Parses `"min:max:step"`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(StargenError::InvalidConfig(format!("grid spec {spec:?} is not min:max:step")));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| StargenError::InvalidConfig(format!("bad number {s:?} in grid spec {spec:?}")))
        };
        Self::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
    }

    /// Number of nodes `min, min + step, …` up to `max` inclusive.
    pub fn len(&self) -> usize {
        ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.min + i as f64 * self.step).collect()
    }

    /// Cell centres of the partition of `[min, max]` into cells of width
    /// close to `step`.
    pub fn midpoints(&self) -> (Vec<f64>, f64) {
        let cells = ((self.max - self.min) / self.step).round().max(1.0) as usize;
        let h = (self.max - self.min) / cells as f64;
        ((0..cells).map(|i| self.min + (i as f64 + 0.5) * h).collect(), h)
    }
}

/// Tensor grid over `z = (p₁..p_N, q₁..q_N)`, one axis per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub config: PhaseConfig,
    pub axes: Vec<Axis>,
}

impl PhaseGrid {
    pub fn new(config: PhaseConfig, axes: Vec<Axis>) -> Result<Self> {
        if axes.len() != config.nvars() {
            return Err(StargenError::DimensionMismatch { expected: config.nvars(), got: axes.len() });
        }
        Ok(Self { config, axes })
    }

    /// The same axis in every direction.
    pub fn uniform(config: PhaseConfig, min: f64, max: f64, step: f64) -> Result<Self> {
        let axis = Axis::new(min, max, step)?;
        Self::new(config, vec![axis; config.nvars()])
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All nodes in row-major order (last coordinate fastest).
    pub fn points(&self) -> Vec<Vec<f64>> {
        tensor_points(&self.axes.iter().map(Axis::nodes).collect::<Vec<_>>())
    }

    /// Values of `f` at every node, in the order of [`PhaseGrid::points`].
    pub fn eval<F>(&self, f: F) -> Vec<C64>
    where
        F: Fn(&[f64]) -> C64 + Sync,
    {
        self.points().par_iter().map(|z| f(z)).collect()
    }

    /// Largest `|f|` over the nodes.
    pub fn max_abs<F>(&self, f: F) -> f64
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        self.points().par_iter().map(|z| f(z)).reduce(|| 0.0, f64::max)
    }

    /// Midpoint rule `∫ f dz` over the grid box.
    pub fn integrate<F>(&self, f: F) -> C64
    where
        F: Fn(&[f64]) -> C64 + Sync,
    {
        let mids: Vec<(Vec<f64>, f64)> = self.axes.iter().map(Axis::midpoints).collect();
        let vol: f64 = mids.iter().map(|m| m.1).product();
        let pts = tensor_points(&mids.into_iter().map(|m| m.0).collect::<Vec<_>>());
        let vals: Vec<C64> = pts.par_iter().map(|z| f(z)).collect();
        pairwise_sum(&vals) * vol
    }

    /// A symmetric box around the centre of `g`'s Gaussian, wide enough that
    /// the dropped tail is below `tail` relative to the peak and fine enough
    /// for the midpoint rule to be spectrally accurate.
    ///
    /// `extra_degree` accounts for polynomial factors multiplied in later.
    pub fn auto(g: &GaussSymbol, tail: f64, extra_degree: u32) -> Result<Self> {
        let cfg = *g.config();
        let n = g.nvars();
        let re = g.m.map(|x| C64::new(x.re, 0.0));
        let decay: Vec<f64> = eigenvalues(&re).iter().map(|l| -l.re).collect();
        let mu_min = decay.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(mu_min > 0.0) {
            return Err(StargenError::Divergent("Gaussian does not decay in every direction".into()));
        }
        let mu_max = eigenvalues(&g.m).iter().map(|l| l.norm()).fold(0.0, f64::max);
        // centre of the real Gaussian: −½ (Re M)⁻¹ Re v
        let rev = g.v.map(|x| C64::new(x.re, 0.0));
        let centre = match inverse(&re, "Gaussian exponent") {
            Ok(inv) => (inv * rev) * C64::new(-0.5, 0.0),
            Err(_) => CVec::zeros(n),
        };
        let d = (g.prefactor.degree() + extra_degree) as f64;
        let target = -tail.ln();
        let mut r: f64 = (target / mu_min).sqrt();
        for _ in 0..20 {
            r = ((target + d * r.max(1.0).ln()) / mu_min).sqrt();
        }
        let h = std::f64::consts::PI / (mu_max * (30.0 + 2.0 * d)).sqrt();
        let axes = (0..n)
            .map(|i| {
                let c = centre[i].re;
                Axis::new(c - r, c + r, h)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(cfg, axes)
    }
}

impl PhaseGrid {
    /// Values of a polynomial at every node, by contracting one axis at a
    /// time instead of evaluating each point separately.
    pub fn eval_poly(&self, poly: &Poly) -> Result<Vec<C64>> {
        if poly.nvars() != self.axes.len() {
            return Err(StargenError::DimensionMismatch { expected: self.axes.len(), got: poly.nvars() });
        }
        let nodes: Vec<Vec<f64>> = self.axes.iter().map(Axis::nodes).collect();
        Ok(eval_poly_tensor(poly, &nodes))
    }

    /// Values of a Gaussian symbol at every node, in the order of
    /// [`PhaseGrid::points`].
    pub fn eval_gauss(&self, g: &GaussSymbol) -> Result<Vec<C64>> {
        let pre = self.eval_poly(&g.prefactor.poly)?;
        let expo = self.eval_poly(&g.exponent_poly())?;
        Ok(pre.par_iter().zip(expo.par_iter()).map(|(a, e)| a * e.exp()).collect())
    }

    /// Smallest box containing both grids, at the finer of the two steps.
    pub fn union(&self, other: &PhaseGrid) -> Result<Self> {
        if self.axes.len() != other.axes.len() {
            return Err(StargenError::DimensionMismatch { expected: self.axes.len(), got: other.axes.len() });
        }
        let axes = self
            .axes
            .iter()
            .zip(&other.axes)
            .map(|(a, b)| Axis::new(a.min.min(b.min), a.max.max(b.max), a.step.min(b.step)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.config, axes)
    }
}

fn eval_poly_tensor(poly: &Poly, nodes: &[Vec<f64>]) -> Vec<C64> {
    let nv = nodes.len();
    // prefix exponents -> values over the trailing axes (row-major)
    let mut cur: BTreeMap<Vec<u32>, Vec<C64>> = poly.terms().iter().map(|(e, c)| (e.clone(), vec![*c])).collect();
    let mut tail = 1usize;
    for k in (0..nv).rev() {
        let xs = &nodes[k];
        let mut next: BTreeMap<Vec<u32>, Vec<C64>> = BTreeMap::new();
        for (e, vals) in cur {
            let entry = next.entry(e[..k].to_vec()).or_insert_with(|| vec![C64::new(0.0, 0.0); xs.len() * tail]);
            for (i, x) in xs.iter().enumerate() {
                let xp = x.powi(e[k] as i32);
                for (dst, v) in entry[i * tail..(i + 1) * tail].iter_mut().zip(&vals) {
                    *dst += v * xp;
                }
            }
        }
        cur = next;
        tail *= xs.len();
    }
    cur.remove(&Vec::new()).unwrap_or_else(|| vec![C64::new(0.0, 0.0); tail])
}

fn tensor_points(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let total: usize = axes.iter().map(Vec::len).product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; axes.len()];
    for _ in 0..total {
        out.push(idx.iter().zip(axes).map(|(&i, a)| a[i]).collect());
        for k in (0..axes.len()).rev() {
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
    out
}

/// Pairwise summation with a fixed split, so the result does not depend on
/// the number of threads.
pub fn pairwise_sum(v: &[C64]) -> C64 {
    if v.len() <= 256 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    let (x, y) = rayon::join(|| pairwise_sum(a), || pairwise_sum(b));
    x + y
}
