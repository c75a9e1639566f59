//! Domain boxes and deterministic low-discrepancy sample grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of grid points for verification runs.
pub const DEFAULT_GRID: usize = 64;

/// Fraction of each side kept clear of the box boundary.
pub const BOUNDARY_MARGIN: f64 = 1e-3;

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Axis-aligned coordinate box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub names: Vec<String>,
    pub bounds: Vec<[f64; 2]>,
}

impl DomainBox {
    pub fn new(names: Vec<String>, bounds: Vec<[f64; 2]>) -> Result<Self> {
        if names.len() != bounds.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates but {} intervals",
                names.len(),
                bounds.len()
            )));
        }
        for (n, [lo, hi]) in names.iter().zip(&bounds) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(format!("empty interval [{lo}, {hi}] for `{n}`")));
            }
        }
        Ok(Self { names, bounds })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    /// Replaces the interval of a named coordinate.
    pub fn set(&mut self, name: &str, lo: f64, hi: f64) -> Result<()> {
        let i = self
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownSymbol {
                name: name.to_string(),
                declared: self.names.join(", "),
            })?;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!("empty interval [{lo}, {hi}] for `{name}`")));
        }
        self.bounds[i] = [lo, hi];
        Ok(())
    }

    /// Maps a unit-cube point into the box, keeping the boundary margin.
    pub fn map_unit(&self, unit: &[f64]) -> Vec<f64> {
        self.bounds
            .iter()
            .zip(unit)
            .map(|([lo, hi], u)| lo + (hi - lo) * (BOUNDARY_MARGIN + (1.0 - 2.0 * BOUNDARY_MARGIN) * u))
            .collect()
    }

    /// `count` Halton points (indices `1..=count`) inside the box.
    pub fn halton(&self, count: usize) -> Vec<Vec<f64>> {
        assert!(self.dim() <= PRIMES.len(), "grid dimension above {}", PRIMES.len());
        (1..=count as u64)
            .map(|i| {
                let unit: Vec<f64> = PRIMES[..self.dim()].iter().map(|&b| radical_inverse(i, b)).collect();
                self.map_unit(&unit)
            })
            .collect()
    }

    /// Points drawn from a seeded uniform distribution, for property tests
    /// that want coverage different from the Halton grid.
    pub fn scrambled(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        // SplitMix64: enough for sampling, keeps the core free of an RNG dependency
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
        };
        (0..count)
            .map(|_| {
                let unit: Vec<f64> = (0..self.dim()).map(|_| next()).collect();
                self.map_unit(&unit)
            })
            .collect()
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}
