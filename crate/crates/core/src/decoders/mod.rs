//! Erasure decoders on residual graphs: sequential (SPD) and parallel (PPD)
//! peeling and flooding belief propagation, all producing per-iteration
//! traces over the same record type.

mod bp;
mod peeling;
mod stopping;

pub use bp::bp;
pub use peeling::{ppd, ppd_with_snapshots, spd};
pub use stopping::{find_stopping_sets, StoppingSetReport};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::channel::ResidualGraph;
use crate::ensemble::TypeVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeStatus {
    Success,
    Stalled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    Ppd,
    Bp,
}

impl std::str::FromStr for DecoderKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "ppd" => Ok(DecoderKind::Ppd),
            "bp" => Ok(DecoderKind::Bp),
            other => Err(crate::Error::InvalidParameter(format!("unknown decoder {other:?}"))),
        }
    }
}

/// One decoder iteration (1-based).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Deg-1 CNs at the start of the iteration.
    pub deg1_count: usize,
    /// Local VN indices resolved in this iteration, sorted.
    pub resolved: Vec<u32>,
    /// Unresolved VNs after the iteration.
    pub residual_vn_count: usize,
    /// Resolved VNs attached to two or more deg-1 CNs in this iteration.
    pub multi_deg1_vns: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderTrace {
    pub initially_erased: usize,
    pub iterations: Vec<IterationRecord>,
    pub status: DecodeStatus,
    /// Local indices of VNs left unresolved.
    pub remaining: Vec<u32>,
}

impl DecoderTrace {
    pub(crate) fn finish(initially_erased: usize, iterations: Vec<IterationRecord>, unresolved: &[bool]) -> Self {
        let remaining: Vec<u32> = unresolved
            .iter()
            .enumerate()
            .filter_map(|(v, &u)| u.then_some(v as u32))
            .collect();
        let status = if remaining.is_empty() {
            DecodeStatus::Success
        } else {
            DecodeStatus::Stalled
        };
        DecoderTrace {
            initially_erased,
            iterations,
            status,
            remaining,
        }
    }

    pub fn is_success(&self) -> bool {
        self.status == DecodeStatus::Success
    }

    /// Number of iterations that resolved at least one VN.
    pub fn active_iterations(&self) -> usize {
        self.iterations.len()
            - self
                .iterations
                .iter()
                .rev()
                .take_while(|r| r.resolved.is_empty())
                .count()
    }

    /// `Omega`, the iterations needed to recover everything.
    pub fn stopping_time(&self) -> Option<usize> {
        self.is_success().then(|| self.active_iterations())
    }

    /// Per-iteration resolved sets with trailing empty iterations trimmed.
    pub fn resolved_sets(&self) -> Vec<&[u32]> {
        self.iterations[..self.active_iterations()]
            .iter()
            .map(|r| r.resolved.as_slice())
            .collect()
    }

    /// Resolved VNs per iteration never exceed the deg-1 CNs available at
    /// the start of that iteration.
    pub fn upper_bound_holds(&self) -> bool {
        self.iterations.iter().all(|r| r.resolved.len() <= r.deg1_count)
    }

    pub fn total_resolved(&self) -> usize {
        self.iterations.iter().map(|r| r.resolved.len()).sum()
    }

    /// CSV with columns `iteration,resolved_count,deg1_count,residual_vn_count`.
    /// Counts are divided by `norm` when given.
    pub fn to_csv(&self, norm: Option<f64>) -> String {
        let mut out = String::from("iteration,resolved_count,deg1_count,residual_vn_count\n");
        let scale = norm.unwrap_or(1.0);
        for r in &self.iterations {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.iteration,
                r.resolved.len() as f64 / scale,
                r.deg1_count as f64 / scale,
                r.residual_vn_count as f64 / scale
            );
        }
        out
    }

    /// Full JSON trace with Tanner-graph VN ids, for equivalence audits.
    pub fn to_json(&self, residual: &ResidualGraph) -> crate::Result<String> {
        let global = |vs: &[u32]| -> Vec<u32> { vs.iter().map(|&v| residual.vn_id(v as usize)).collect() };
        let iterations: Vec<_> = self
            .iterations
            .iter()
            .map(|r| {
                serde_json::json!({
                    "iteration": r.iteration,
                    "deg1_count": r.deg1_count,
                    "residual_vn_count": r.residual_vn_count,
                    "multi_deg1_vns": r.multi_deg1_vns,
                    "resolved": global(&r.resolved),
                })
            })
            .collect();
        Ok(serde_json::to_string(&serde_json::json!({
            "initially_erased": self.initially_erased,
            "status": self.status,
            "remaining": global(&self.remaining),
            "iterations": iterations,
        }))?)
    }
}

/// CN partition into `C_1` (one unresolved neighbour) and `C_{>=2}`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CnClasses {
    pub c1: Vec<u32>,
    pub c_ge2: Vec<u32>,
}

pub fn classify_cns(residual: &ResidualGraph, unresolved: &[bool]) -> CnClasses {
    let mut classes = CnClasses::default();
    for c in 0..residual.cn_count() {
        let k = residual
            .cn_neighbors(c)
            .iter()
            .filter(|&&v| unresolved[v as usize])
            .count();
        match k {
            0 => {}
            1 => classes.c1.push(c as u32),
            _ => classes.c_ge2.push(c as u32),
        }
    }
    classes
}

/// Residual type-degree counts: VN type -> count, CN residual type -> count
/// (CNs with no unresolved neighbour are omitted).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualSnapshot {
    pub vn_types: BTreeMap<u32, usize>,
    pub cn_types: BTreeMap<TypeVector, usize>,
}

impl ResidualSnapshot {
    pub fn capture(residual: &ResidualGraph, unresolved: &[bool]) -> Self {
        let mut snap = ResidualSnapshot::default();
        for (v, _) in unresolved.iter().enumerate().filter(|(_, &u)| u) {
            *snap.vn_types.entry(residual.vn_type(v)).or_default() += 1;
        }
        for c in 0..residual.cn_count() {
            let t = residual.cn_residual_type(c, Some(unresolved));
            if !t.is_empty() {
                *snap.cn_types.entry(t).or_default() += 1;
            }
        }
        snap
    }

    pub fn deg1_count(&self) -> usize {
        self.cn_types
            .iter()
            .filter(|(t, _)| t.degree() == 1)
            .map(|(_, &n)| n)
            .sum()
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::channel::ResidualGraph;

    /// Two VNs, two CNs, each CN attached to both VNs.
    pub fn cycle() -> ResidualGraph {
        ResidualGraph::from_edges(2, 2, &[(0, 0), (1, 0), (0, 1), (1, 1)]).unwrap()
    }

    /// CN0 - VN0 - CN1 - VN1, CN1 attached to both VNs.
    pub fn path() -> ResidualGraph {
        ResidualGraph::from_edges(2, 2, &[(0, 0), (0, 1), (1, 1)]).unwrap()
    }

    /// One VN on `l` deg-1 CNs.
    pub fn star(l: usize) -> ResidualGraph {
        let edges: Vec<_> = (0..l as u32).map(|c| (0, c)).collect();
        ResidualGraph::from_edges(1, l, &edges).unwrap()
    }

    /// VN_i sits on CN_i and CN_{i+1} (the last VN only on CN_{d-1}); only
    /// CN_0 starts at degree one, so recovery moves one VN per iteration.
    pub fn chain(d: usize) -> ResidualGraph {
        let mut edges = Vec::new();
        for i in 0..d as u32 {
            edges.push((i, i));
            if (i as usize) + 1 < d {
                edges.push((i, i + 1));
            }
        }
        ResidualGraph::from_edges(d, d, &edges).unwrap()
    }
}
