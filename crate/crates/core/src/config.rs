use serde::{Deserialize, Serialize};

use crate::error::{Result, StargenError};

/// Physical parameters shared by every symbol on a phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseConfig {
    /// Degrees of freedom `N`; phase space has dimension `2N`.
    pub dim_n: usize,
    pub hbar: f64,
    pub mass: f64,
    pub omega: f64,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self { dim_n: 1, hbar: 1.0, mass: 1.0, omega: 1.0 }
    }
}

impl PhaseConfig {
    pub fn new(dim_n: usize, hbar: f64, mass: f64, omega: f64) -> Result<Self> {
        let c = Self { dim_n, hbar, mass, omega };
        c.validate()?;
        Ok(c)
    }

    /// Unit parameters with `N` degrees of freedom.
    pub fn unit(dim_n: usize) -> Self {
        Self { dim_n, ..Self::default() }
    }

    pub fn with_hbar(mut self, hbar: f64) -> Self {
        self.hbar = hbar;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim_n == 0 {
            return Err(StargenError::InvalidConfig("dim_n must be at least 1".into()));
        }
        for (name, v) in [("hbar", self.hbar), ("mass", self.mass), ("omega", self.omega)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(StargenError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Phase-space dimension `2N`.
    pub fn nvars(&self) -> usize {
        2 * self.dim_n
    }

    /// Index of `p_i` in `z`.
    pub fn p_index(&self, i: usize) -> usize {
        i
    }

    /// Index of `q_i` in `z`.
    pub fn q_index(&self, i: usize) -> usize {
        self.dim_n + i
    }

    /// True when two configs describe the same star product.
    pub fn compatible(&self, other: &PhaseConfig) -> bool {
        self.dim_n == other.dim_n && self.hbar == other.hbar
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonphysical_values() {
        assert!(PhaseConfig::new(0, 1.0, 1.0, 1.0).is_err());
        assert!(PhaseConfig::new(1, 0.0, 1.0, 1.0).is_err());
        assert!(PhaseConfig::new(1, 1.0, -1.0, 1.0).is_err());
        assert!(PhaseConfig::new(2, 0.5, 2.0, 3.0).is_ok());
    }

    #[test]
    fn index_layout() {
        let c = PhaseConfig::unit(2);
        assert_eq!(c.nvars(), 4);
        assert_eq!(c.p_index(1), 1);
        assert_eq!(c.q_index(0), 2);
    }
}
