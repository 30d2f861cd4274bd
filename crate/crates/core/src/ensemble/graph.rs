use rand::seq::SliceRandom;
use rand::Rng;

use super::{BaseMatrix, CoupledEnsembleSpec, Variant};
use crate::{seed, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub vn: u32,
    pub cn: u32,
    /// Edge type inherited from the base matrix slot.
    pub label: u32,
}

/// Lifted bipartite graph with per-edge type labels and CSR adjacency on
/// both sides.
#[derive(Clone, Debug)]
pub struct TannerGraph {
    pub l: usize,
    pub r: usize,
    pub chain_len: usize,
    pub variant: Variant,
    /// Lifting factor `N` for protograph liftings.
    pub lifting: Option<usize>,
    /// VNs per chain position (`M`): `kN` for liftings.
    pub vns_per_position: usize,
    edges: Vec<Edge>,
    vn_col: Vec<u32>,
    vn_position: Vec<u32>,
    cn_row: Vec<u32>,
    vn_offsets: Vec<u32>,
    vn_adj: Vec<u32>,
    cn_offsets: Vec<u32>,
    cn_adj: Vec<u32>,
}

impl TannerGraph {
    fn assemble(
        params: (usize, usize, usize, Variant),
        lifting: Option<usize>,
        vns_per_position: usize,
        edges: Vec<Edge>,
        vn_col: Vec<u32>,
        vn_position: Vec<u32>,
        cn_row: Vec<u32>,
    ) -> Self {
        let (l, r, chain_len, variant) = params;
        let (vn_offsets, vn_adj) = csr(vn_col.len(), edges.iter().map(|e| e.vn));
        let (cn_offsets, cn_adj) = csr(cn_row.len(), edges.iter().map(|e| e.cn));
        TannerGraph {
            l,
            r,
            chain_len,
            variant,
            lifting,
            vns_per_position,
            edges,
            vn_col,
            vn_position,
            cn_row,
            vn_offsets,
            vn_adj,
            cn_offsets,
            cn_adj,
        }
    }

    /// Replaces every nonzero base entry `b` by a sum of `b` disjoint
    /// uniformly random `N x N` permutations.
    ///
    /// VN `col*N + t` and CN `row*N + t` are the `t`-th copies of base
    /// column `col` and row `row`.
    pub fn lift(base: &BaseMatrix, lifting: usize, seed: u64) -> Result<Self> {
        base.validate()?;
        if lifting == 0 {
            return Err(Error::InvalidParameter("lifting factor N must be >= 1".into()));
        }
        let n = lifting;
        for slot in &base.edge_labels {
            let b = base.entry(slot.row, slot.col);
            if b as usize > n {
                return Err(Error::MultiplicityExceedsLifting {
                    row: slot.row,
                    col: slot.col,
                    multiplicity: b,
                    lifting: n,
                });
            }
        }
        let mut rng = seed::rng(seed);
        let total: usize = base.edge_labels.iter().map(|s| base.entry(s.row, s.col) as usize).sum();
        let mut edges = Vec::with_capacity(total * n);
        let mut p: Vec<u32> = (0..n as u32).collect();
        let mut q: Vec<u32> = (0..n as u32).collect();
        for slot in &base.edge_labels {
            let b = base.entry(slot.row, slot.col);
            p.shuffle(&mut rng);
            if b > 1 {
                q.shuffle(&mut rng);
            }
            for shift in 0..b {
                for t in 0..n {
                    let target = if b == 1 {
                        p[t] as usize
                    } else {
                        q[(p[t] as usize + shift as usize) % n] as usize
                    };
                    edges.push(Edge {
                        vn: (slot.col * n + t) as u32,
                        cn: (slot.row * n + target) as u32,
                        label: slot.label as u32,
                    });
                }
            }
        }
        let k = base.col_count().div_ceil(base.chain_len.max(1));
        let vn_col: Vec<u32> = (0..base.col_count() * n).map(|v| (v / n) as u32).collect();
        let vn_position = vn_col.iter().map(|&c| c / k as u32).collect();
        let cn_row = (0..base.row_count() * n).map(|c| (c / n) as u32).collect();
        Ok(Self::assemble(
            (base.l, base.r, base.chain_len, base.variant),
            Some(n),
            k * n,
            edges,
            vn_col,
            vn_position,
            cn_row,
        ))
    }

    /// Random `(l,r,L)_u` chain: `m` VNs per position, `m/k` CNs of `r`
    /// sockets per CN position. Each VN at position `u` takes one uniformly
    /// random free socket at each CN position `u..u+l-1`.
    pub fn random_u(spec: &CoupledEnsembleSpec, m: usize, seed: u64) -> Result<Self> {
        spec.validate()?;
        if spec.variant != Variant::RandomU {
            return Err(Error::InvalidEnsemble(format!("{spec} is not a random_u ensemble")));
        }
        let k = spec.k();
        if m == 0 || m % k != 0 {
            return Err(Error::InvalidParameter(format!(
                "M = {m} must be a positive multiple of k = {k}"
            )));
        }
        let base = BaseMatrix::build(spec)?;
        let mut label_of = vec![vec![u32::MAX; base.col_count()]; base.row_count()];
        for s in &base.edge_labels {
            label_of[s.row][s.col] = s.label as u32;
        }
        let (l, r, len) = (spec.l, spec.r, spec.chain_len);
        let cns_per_position = m / k;
        let positions = spec.cn_positions();
        let mut rng = seed::rng(seed);
        let mut edges = Vec::with_capacity(l * len * m);
        let mut sockets: Vec<u32> = (0..(cns_per_position * r) as u32).collect();
        for p in 0..positions {
            let first_u = p.saturating_sub(l - 1);
            let last_u = p.min(len - 1);
            let incoming = (last_u + 1 - first_u) * m;
            // partial Fisher-Yates: the first `incoming` entries become a
            // uniformly random ordered sample of distinct sockets
            for i in 0..incoming {
                let j = rng.random_range(i..sockets.len());
                sockets.swap(i, j);
            }
            let mut next = 0;
            for u in first_u..=last_u {
                for i in 0..m {
                    let col = u * k + i % k;
                    let cn = p * cns_per_position + sockets[next] as usize / r;
                    next += 1;
                    edges.push(Edge {
                        vn: (u * m + i) as u32,
                        cn: cn as u32,
                        label: label_of[p][col],
                    });
                }
            }
        }
        let vn_col = (0..len * m).map(|v| ((v / m) * k + (v % m) % k) as u32).collect();
        let vn_position = (0..len * m).map(|v| (v / m) as u32).collect();
        let cn_row = (0..positions * cns_per_position)
            .map(|c| (c / cns_per_position) as u32)
            .collect();
        Ok(Self::assemble(
            (l, r, len, Variant::RandomU),
            None,
            m,
            edges,
            vn_col,
            vn_position,
            cn_row,
        ))
    }

    pub fn vn_count(&self) -> usize {
        self.vn_col.len()
    }

    pub fn cn_count(&self) -> usize {
        self.cn_row.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Base column (VN type) of a VN.
    pub fn vn_type(&self, vn: usize) -> u32 {
        self.vn_col[vn]
    }

    /// Chain position `u` of a VN.
    pub fn vn_position(&self, vn: usize) -> u32 {
        self.vn_position[vn]
    }

    /// Base row (CN type / CN position) of a CN.
    pub fn cn_type(&self, cn: usize) -> u32 {
        self.cn_row[cn]
    }

    /// Edge indices incident to a VN.
    pub fn vn_edges(&self, vn: usize) -> &[u32] {
        &self.vn_adj[self.vn_offsets[vn] as usize..self.vn_offsets[vn + 1] as usize]
    }

    /// Edge indices incident to a CN.
    pub fn cn_edges(&self, cn: usize) -> &[u32] {
        &self.cn_adj[self.cn_offsets[cn] as usize..self.cn_offsets[cn + 1] as usize]
    }

    pub fn vn_degree(&self, vn: usize) -> usize {
        (self.vn_offsets[vn + 1] - self.vn_offsets[vn]) as usize
    }

    pub fn cn_degree(&self, cn: usize) -> usize {
        (self.cn_offsets[cn + 1] - self.cn_offsets[cn]) as usize
    }

    /// Collapses each `N x N` block back to its edge count divided by `N`.
    pub fn project_to_base(&self) -> Option<Vec<Vec<u32>>> {
        let n = self.lifting?;
        let rows = self.cn_count() / n;
        let cols = self.vn_count() / n;
        let mut counts = vec![vec![0u32; cols]; rows];
        for e in &self.edges {
            counts[e.cn as usize / n][e.vn as usize / n] += 1;
        }
        for row in &mut counts {
            for c in row.iter_mut() {
                *c /= n as u32;
            }
        }
        Some(counts)
    }
}

/// Builds CSR offsets/adjacency (edge indices) for `nodes` nodes.
fn csr(nodes: usize, endpoints: impl Iterator<Item = u32> + Clone) -> (Vec<u32>, Vec<u32>) {
    let mut offsets = vec![0u32; nodes + 1];
    for v in endpoints.clone() {
        offsets[v as usize + 1] += 1;
    }
    for i in 0..nodes {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut adj = vec![0u32; offsets[nodes] as usize];
    for (e, v) in endpoints.enumerate() {
        adj[fill[v as usize] as usize] = e as u32;
        fill[v as usize] += 1;
    }
    (offsets, adj)
}
