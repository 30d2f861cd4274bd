//! Coupled ensembles: base matrices, node/edge type tables and finite
//! Tanner graphs.

mod base;
mod graph;
mod types;

pub use base::{BaseMatrix, EdgeSlot};
pub use graph::{Edge, TannerGraph};
pub use types::{NodeTypeTables, TypeVector};

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Deterministic coupled protograph, lifted by random permutations.
    Protograph,
    /// Randomly constructed `(l,r,L)_u` chain with per-realization CN sockets.
    RandomU,
    /// A single uncoupled `(l,r)` block `[l l ... l]` (chain length 1).
    Uncoupled,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "protograph" | "proto" => Ok(Variant::Protograph),
            "random_u" | "random-u" | "u" => Ok(Variant::RandomU),
            "uncoupled" => Ok(Variant::Uncoupled),
            other => Err(Error::InvalidEnsemble(format!("unknown variant {other:?}"))),
        }
    }
}

/// `(l, r, L)` ensemble parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoupledEnsembleSpec {
    pub l: usize,
    pub r: usize,
    #[serde(rename = "L")]
    pub chain_len: usize,
    pub variant: Variant,
}

impl CoupledEnsembleSpec {
    pub fn new(l: usize, r: usize, chain_len: usize, variant: Variant) -> Result<Self> {
        let spec = CoupledEnsembleSpec {
            l,
            r,
            chain_len,
            variant,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn protograph(l: usize, r: usize, chain_len: usize) -> Result<Self> {
        Self::new(l, r, chain_len, Variant::Protograph)
    }

    pub fn random_u(l: usize, r: usize, chain_len: usize) -> Result<Self> {
        Self::new(l, r, chain_len, Variant::RandomU)
    }

    pub fn uncoupled(l: usize, r: usize) -> Result<Self> {
        Self::new(l, r, 1, Variant::Uncoupled)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 2 {
            return Err(Error::InvalidEnsemble(format!("l = {} < 2", self.l)));
        }
        if self.r < self.l || self.r % self.l != 0 {
            return Err(Error::InvalidEnsemble(format!(
                "r = {} is not a multiple of l = {}",
                self.r, self.l
            )));
        }
        if self.chain_len < 1 {
            return Err(Error::InvalidEnsemble("L must be at least 1".into()));
        }
        if self.variant == Variant::Uncoupled && self.chain_len != 1 {
            return Err(Error::InvalidEnsemble(
                "uncoupled ensembles have chain length 1".into(),
            ));
        }
        Ok(())
    }

    /// `k = r / l`, the number of VN types per position.
    pub fn k(&self) -> usize {
        self.r / self.l
    }

    /// Number of CN positions: `L + l - 1` for coupled chains, 1 uncoupled.
    pub fn cn_positions(&self) -> usize {
        match self.variant {
            Variant::Uncoupled => 1,
            _ => self.chain_len + self.l - 1,
        }
    }

    /// Design rate as an exact fraction `(numerator, denominator)`.
    ///
    /// Protograph chains count every check position, `1 - (L+l-1)/(kL)`.
    /// The random construction and the uncoupled block use `1 - l/r`.
    pub fn design_rate_fraction(&self) -> (u64, u64) {
        match self.variant {
            Variant::Protograph => {
                let den = (self.k() * self.chain_len) as u64;
                let checks = (self.chain_len + self.l - 1) as u64;
                (den - checks.min(den), den)
            }
            Variant::RandomU | Variant::Uncoupled => ((self.r - self.l) as u64, self.r as u64),
        }
    }

    pub fn design_rate(&self) -> f64 {
        let (num, den) = self.design_rate_fraction();
        num as f64 / den as f64
    }

    /// Short label such as `(3,6,50)` or `(3,6,50)_u`.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for CoupledEnsembleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.variant {
            Variant::Protograph => write!(f, "({},{},{})", self.l, self.r, self.chain_len),
            Variant::RandomU => write!(f, "({},{},{})_u", self.l, self.r, self.chain_len),
            Variant::Uncoupled => write!(f, "({},{})", self.l, self.r),
        }
    }
}

/// Builds the base matrix of a coupled (or uncoupled) ensemble.
pub fn build_coupled_base(spec: &CoupledEnsembleSpec) -> Result<BaseMatrix> {
    BaseMatrix::build(spec)
}

pub fn enumerate_types(base: &BaseMatrix) -> Result<NodeTypeTables> {
    NodeTypeTables::from_base(base)
}

pub fn design_rate(spec: &CoupledEnsembleSpec) -> f64 {
    spec.design_rate()
}

pub fn lift(base: &BaseMatrix, lifting: usize, seed: u64) -> Result<TannerGraph> {
    TannerGraph::lift(base, lifting, seed)
}

/// Builds a `(l,r,L)_u` graph with `m` VNs per position.
pub fn build_random_u(spec: &CoupledEnsembleSpec, m: usize, seed: u64) -> Result<TannerGraph> {
    TannerGraph::random_u(spec, m, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_degrees() {
        assert!(CoupledEnsembleSpec::protograph(3, 5, 3).is_err());
        assert!(CoupledEnsembleSpec::protograph(1, 2, 3).is_err());
        assert!(CoupledEnsembleSpec::protograph(3, 6, 0).is_err());
        assert!(CoupledEnsembleSpec::protograph(6, 3, 3).is_err());
        assert!(CoupledEnsembleSpec::protograph(3, 6, 3).is_ok());
    }

    #[test]
    fn design_rates() {
        let s = CoupledEnsembleSpec::protograph(3, 6, 100).unwrap();
        assert_eq!(s.design_rate_fraction(), (98, 200));
        assert!((s.design_rate() - 0.49).abs() < 1e-15);
        let s = CoupledEnsembleSpec::protograph(4, 8, 100).unwrap();
        assert!((s.design_rate() - 0.485).abs() < 1e-15);
        // L -> infinity tends to 1 - l/r.
        let s = CoupledEnsembleSpec::protograph(3, 6, 1_000_000).unwrap();
        assert!((s.design_rate() - 0.5).abs() < 1e-5);
        let s = CoupledEnsembleSpec::random_u(3, 6, 50).unwrap();
        assert_eq!(s.design_rate(), 0.5);
    }

    #[test]
    fn labels() {
        assert_eq!(CoupledEnsembleSpec::protograph(3, 6, 50).unwrap().label(), "(3,6,50)");
        assert_eq!(CoupledEnsembleSpec::random_u(3, 6, 50).unwrap().label(), "(3,6,50)_u");
        assert_eq!("random_u".parse::<Variant>().unwrap(), Variant::RandomU);
    }
}
