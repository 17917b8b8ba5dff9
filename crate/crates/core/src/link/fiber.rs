use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric core adjacency with an empty diagonal.
///
/// Serialized as a list of `[a, b]` core-index pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    n: usize,
    cells: Vec<bool>,
}

impl Adjacency {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            cells: vec![false; n * n],
        }
    }

    pub fn from_pairs(n: usize, pairs: &[[usize; 2]]) -> Result<Self> {
        let mut adj = Self::empty(n);
        for &[a, b] in pairs {
            if a >= n || b >= n {
                return Err(Error::invalid(
                    "adjacency",
                    format!("pair [{a}, {b}] references a core outside 0..{n}"),
                ));
            }
            if a == b {
                return Err(Error::invalid("adjacency", format!("core {a} adjacent to itself")));
            }
            adj.cells[a * n + b] = true;
            adj.cells[b * n + a] = true;
        }
        Ok(adj)
    }

    /// Hexagonal seven-core layout: core 0 in the center, cores 1..=6 on the ring.
    pub fn seven_core_hex() -> Self {
        let mut pairs = Vec::with_capacity(12);
        for outer in 1..=6 {
            pairs.push([0, outer]);
            let next = if outer == 6 { 1 } else { outer + 1 };
            pairs.push([outer, next]);
        }
        Self::from_pairs(7, &pairs).expect("static layout")
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        a < self.n && b < self.n && self.cells[a * self.n + b]
    }

    pub fn neighbors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&b| self.adjacent(a, b))
    }

    pub fn pairs(&self) -> Vec<[usize; 2]> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in (a + 1)..self.n {
                if self.adjacent(a, b) {
                    out.push([a, b]);
                }
            }
        }
        out
    }

    fn is_symmetric_hollow(&self) -> bool {
        (0..self.n).all(|a| {
            !self.cells[a * self.n + a] && (0..self.n).all(|b| self.cells[a * self.n + b] == self.cells[b * self.n + a])
        })
    }
}

/// Per-pair coupling override (typically a second-order, non-adjacent path).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingOverride {
    pub a: usize,
    pub b: usize,
    /// Coupling coefficient in 1/km.
    pub coupling: f64,
}

/// Multicore fiber geometry and physical coefficients.
///
/// Attenuations are natural-log power coefficients in 1/km (0.046 /km ≈ 0.2 dB/km).
#[derive(Debug, Clone, PartialEq)]
pub struct FiberSpec {
    pub core_count: usize,
    pub length_km: f64,
    /// Quantum-channel attenuation, 1/km.
    pub alpha_q: f64,
    /// Classical-channel attenuation, 1/km.
    pub alpha_c: f64,
    /// Spontaneous Raman efficiency, 1/(nm·km).
    pub raman_efficiency: f64,
    /// Nearest-neighbor power coupling coefficient, 1/km.
    pub coupling: f64,
    pub adjacency: Adjacency,
    /// Nonlinear coefficient, 1/(W·km).
    pub gamma_nl: f64,
    /// Group-velocity dispersion, ps²/km.
    pub beta2_ps2_per_km: f64,
    /// Couplings between specific core pairs; non-adjacent pairs without an entry couple with 0.
    pub coupling_overrides: Vec<CouplingOverride>,
}

impl FiberSpec {
    /// Seven-core trench fiber with the measured C-band coefficients.
    pub fn seven_core(length_km: f64) -> Self {
        Self {
            core_count: 7,
            length_km,
            alpha_q: 0.046,
            alpha_c: 0.0471,
            raman_efficiency: 6.9e-8,
            coupling: 7e-7,
            adjacency: Adjacency::seven_core_hex(),
            gamma_nl: 1.3,
            beta2_ps2_per_km: 21.7,
            coupling_overrides: Vec::new(),
        }
    }

    /// Standard single-mode fiber, single core, C band.
    pub fn ssmf(length_km: f64) -> Self {
        Self {
            core_count: 1,
            adjacency: Adjacency::empty(1),
            alpha_c: 0.046,
            ..Self::seven_core(length_km)
        }
    }

    pub fn with_length(&self, length_km: f64) -> Self {
        Self {
            length_km,
            ..self.clone()
        }
    }

    /// Power coupling coefficient (1/km) between two distinct cores.
    pub fn coupling_between(&self, a: usize, b: usize) -> f64 {
        if let Some(o) = self
            .coupling_overrides
            .iter()
            .find(|o| (o.a == a && o.b == b) || (o.a == b && o.b == a))
        {
            return o.coupling;
        }
        if self.adjacency.adjacent(a, b) {
            self.coupling
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("length_km", self.length_km),
            ("alpha_q", self.alpha_q),
            ("alpha_c", self.alpha_c),
            ("raman_efficiency", self.raman_efficiency),
            ("coupling", self.coupling),
            ("gamma_nl", self.gamma_nl),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if self.core_count == 0 {
            return Err(Error::invalid("core_count", "must be >= 1"));
        }
        if self.adjacency.len() != self.core_count {
            return Err(Error::invalid(
                "adjacency",
                format!(
                    "matrix is {}x{} but core_count is {}",
                    self.adjacency.len(),
                    self.adjacency.len(),
                    self.core_count
                ),
            ));
        }
        if !self.adjacency.is_symmetric_hollow() {
            return Err(Error::invalid("adjacency", "must be symmetric with empty diagonal"));
        }
        for o in &self.coupling_overrides {
            if o.a >= self.core_count || o.b >= self.core_count || o.a == o.b {
                return Err(Error::invalid(
                    "coupling_overrides",
                    format!("bad core pair ({}, {})", o.a, o.b),
                ));
            }
            if !(o.coupling >= 0.0) {
                return Err(Error::invalid("coupling_overrides", "coupling must be >= 0"));
            }
        }
        Ok(())
    }
}
