//! Binary erasure channel and residual-graph extraction.
//!
//! The all-zero codeword is transmitted implicitly: on the BEC a decoder's
//! behaviour depends only on which positions are erased.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::{TannerGraph, TypeVector};
use crate::{seed, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ErasurePattern {
    /// `true` = erased.
    pub mask: Vec<bool>,
    pub epsilon: f64,
}

/// JSON form of a pattern: the erased indices only.
#[derive(Serialize, Deserialize)]
struct PatternIndices {
    n: usize,
    epsilon: f64,
    erased: Vec<u32>,
}

impl ErasurePattern {
    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn erased_count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn erased_indices(&self) -> Vec<u32> {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i as u32))
            .collect()
    }

    pub fn from_indices(n: usize, epsilon: f64, erased: &[u32]) -> Result<Self> {
        let mut mask = vec![false; n];
        for &i in erased {
            *mask.get_mut(i as usize).ok_or_else(|| {
                Error::InvalidParameter(format!("erased index {i} out of range for n = {n}"))
            })? = true;
        }
        Ok(ErasurePattern { mask, epsilon })
    }

    /// Little-endian bit packing, bit `i % 8` of byte `i / 8`.
    pub fn to_packed(&self) -> Vec<u8> {
        let mut bytes = vec![0u8; self.mask.len().div_ceil(8)];
        for (i, _) in self.mask.iter().enumerate().filter(|(_, &b)| b) {
            bytes[i / 8] |= 1 << (i % 8);
        }
        bytes
    }

    pub fn from_packed(n: usize, epsilon: f64, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != n.div_ceil(8) {
            return Err(Error::LengthMismatch {
                expected: n.div_ceil(8),
                actual: bytes.len(),
            });
        }
        let mask = (0..n).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect();
        Ok(ErasurePattern { mask, epsilon })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&PatternIndices {
            n: self.len(),
            epsilon: self.epsilon,
            erased: self.erased_indices(),
        })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: PatternIndices = serde_json::from_str(s)?;
        Self::from_indices(p.n, p.epsilon, &p.erased)
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} outside [0, 1]")));
    }
    Ok(())
}

/// I.i.d. Bernoulli(`epsilon`) erasures, deterministic in `seed`.
pub fn transmit(n: usize, epsilon: f64, seed: u64) -> Result<ErasurePattern> {
    check_epsilon(epsilon)?;
    let mut rng = seed::rng(seed);
    let mask = (0..n).map(|_| rng.random::<f64>() < epsilon).collect();
    Ok(ErasurePattern { mask, epsilon })
}

/// Subgraph induced by erased VNs: known VNs and their edges are removed and
/// CNs left with no edge are dropped.
///
/// VNs and CNs are renumbered locally; `vn_ids`/`cn_ids` map back to the
/// Tanner graph. Adjacency is CSR over local indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualGraph {
    vn_ids: Vec<u32>,
    cn_ids: Vec<u32>,
    vn_types: Vec<u32>,
    vn_offsets: Vec<u32>,
    vn_adj: Vec<u32>,
    cn_offsets: Vec<u32>,
    cn_adj: Vec<u32>,
    /// Edge label parallel to `cn_adj`.
    cn_labels: Vec<u32>,
}

impl ResidualGraph {
    /// Hand-built residual graph on `vns` VNs and `cns` CNs. Labels default
    /// to 0 and VN types to 0; CNs without edges are kept.
    pub fn from_edges(vns: usize, cns: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let labelled: Vec<(u32, u32, u32)> = edges.iter().map(|&(v, c)| (v, c, 0)).collect();
        Self::from_labelled_edges(vns, cns, &labelled, vec![0; vns])
    }

    /// Like [`from_edges`](Self::from_edges) with `(vn, cn, label)` triples.
    pub fn from_labelled_edges(
        vns: usize,
        cns: usize,
        edges: &[(u32, u32, u32)],
        vn_types: Vec<u32>,
    ) -> Result<Self> {
        if vn_types.len() != vns {
            return Err(Error::LengthMismatch {
                expected: vns,
                actual: vn_types.len(),
            });
        }
        if let Some(&(v, c, _)) = edges.iter().find(|&&(v, c, _)| v as usize >= vns || c as usize >= cns) {
            return Err(Error::InvalidParameter(format!("edge ({v}, {c}) out of range")));
        }
        let mut vn_lists = vec![Vec::new(); vns];
        let mut cn_lists = vec![Vec::new(); cns];
        for &(v, c, label) in edges {
            vn_lists[v as usize].push(c);
            cn_lists[c as usize].push((v, label));
        }
        Ok(Self::from_lists(
            (0..vns as u32).collect(),
            (0..cns as u32).collect(),
            vn_types,
            vn_lists,
            cn_lists,
        ))
    }

    fn from_lists(
        vn_ids: Vec<u32>,
        cn_ids: Vec<u32>,
        vn_types: Vec<u32>,
        vn_lists: Vec<Vec<u32>>,
        cn_lists: Vec<Vec<(u32, u32)>>,
    ) -> Self {
        let mut vn_offsets = Vec::with_capacity(vn_lists.len() + 1);
        let mut vn_adj = Vec::new();
        vn_offsets.push(0);
        for list in vn_lists {
            vn_adj.extend(list);
            vn_offsets.push(vn_adj.len() as u32);
        }
        let mut cn_offsets = Vec::with_capacity(cn_lists.len() + 1);
        let mut cn_adj = Vec::new();
        let mut cn_labels = Vec::new();
        cn_offsets.push(0);
        for list in cn_lists {
            for (v, label) in list {
                cn_adj.push(v);
                cn_labels.push(label);
            }
            cn_offsets.push(cn_adj.len() as u32);
        }
        ResidualGraph {
            vn_ids,
            cn_ids,
            vn_types,
            vn_offsets,
            vn_adj,
            cn_offsets,
            cn_adj,
            cn_labels,
        }
    }

    pub fn vn_count(&self) -> usize {
        self.vn_ids.len()
    }

    pub fn cn_count(&self) -> usize {
        self.cn_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.vn_adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vn_ids.is_empty()
    }

    /// Tanner-graph id of a local VN.
    pub fn vn_id(&self, v: usize) -> u32 {
        self.vn_ids[v]
    }

    pub fn vn_ids(&self) -> &[u32] {
        &self.vn_ids
    }

    pub fn cn_id(&self, c: usize) -> u32 {
        self.cn_ids[c]
    }

    pub fn vn_type(&self, v: usize) -> u32 {
        self.vn_types[v]
    }

    /// Local CN neighbours of local VN `v`.
    pub fn vn_neighbors(&self, v: usize) -> &[u32] {
        &self.vn_adj[self.vn_offsets[v] as usize..self.vn_offsets[v + 1] as usize]
    }

    /// Local VN neighbours of local CN `c`.
    pub fn cn_neighbors(&self, c: usize) -> &[u32] {
        &self.cn_adj[self.cn_offsets[c] as usize..self.cn_offsets[c + 1] as usize]
    }

    /// Edge labels parallel to [`cn_neighbors`](Self::cn_neighbors).
    pub fn cn_labels(&self, c: usize) -> &[u32] {
        &self.cn_labels[self.cn_offsets[c] as usize..self.cn_offsets[c + 1] as usize]
    }

    pub fn cn_degree(&self, c: usize) -> usize {
        (self.cn_offsets[c + 1] - self.cn_offsets[c]) as usize
    }

    pub fn vn_degree(&self, v: usize) -> usize {
        (self.vn_offsets[v + 1] - self.vn_offsets[v]) as usize
    }

    /// Residual type of CN `c`, restricted to the VNs still marked in
    /// `unresolved` (all VNs when `None`).
    pub fn cn_residual_type(&self, c: usize, unresolved: Option<&[bool]>) -> TypeVector {
        let labels = self
            .cn_neighbors(c)
            .iter()
            .zip(self.cn_labels(c))
            .filter(|(&v, _)| unresolved.is_none_or(|u| u[v as usize]))
            .map(|(_, &l)| l);
        TypeVector::from_labels(labels)
    }
}

/// Removes known VNs (and their edges) from `graph`.
pub fn residual_graph(graph: &TannerGraph, pattern: &ErasurePattern) -> Result<ResidualGraph> {
    if pattern.len() != graph.vn_count() {
        return Err(Error::LengthMismatch {
            expected: graph.vn_count(),
            actual: pattern.len(),
        });
    }
    let mut local_vn = vec![u32::MAX; graph.vn_count()];
    let mut vn_ids = Vec::new();
    for (v, _) in pattern.mask.iter().enumerate().filter(|(_, &e)| e) {
        local_vn[v] = vn_ids.len() as u32;
        vn_ids.push(v as u32);
    }
    let edges = graph.edges();
    let mut local_cn = vec![u32::MAX; graph.cn_count()];
    let mut cn_ids = Vec::new();
    let mut cn_lists: Vec<Vec<(u32, u32)>> = Vec::new();
    let mut vn_lists: Vec<Vec<u32>> = vec![Vec::new(); vn_ids.len()];
    for c in 0..graph.cn_count() {
        for &e in graph.cn_edges(c) {
            let edge = edges[e as usize];
            let lv = local_vn[edge.vn as usize];
            if lv == u32::MAX {
                continue;
            }
            if local_cn[c] == u32::MAX {
                local_cn[c] = cn_ids.len() as u32;
                cn_ids.push(c as u32);
                cn_lists.push(Vec::new());
            }
            let lc = local_cn[c];
            cn_lists[lc as usize].push((lv, edge.label));
            vn_lists[lv as usize].push(lc);
        }
    }
    let vn_types = vn_ids.iter().map(|&v| graph.vn_type(v as usize)).collect();
    Ok(ResidualGraph::from_lists(vn_ids, cn_ids, vn_types, vn_lists, cn_lists))
}
