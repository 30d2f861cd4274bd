use serde::{Deserialize, Serialize};
use std::fmt;

use super::BaseMatrix;
use crate::{Error, Result};

/// Sparse vector of edge-type multiplicities, `(edge type, count)` pairs
/// sorted by edge type with all counts nonzero.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TypeVector(Vec<(u32, u32)>);

impl TypeVector {
    pub fn empty() -> Self {
        TypeVector(Vec::new())
    }

    /// Builds from arbitrary `(edge, count)` pairs, merging duplicates and
    /// dropping zeros.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut v: Vec<(u32, u32)> = pairs.into_iter().filter(|&(_, c)| c > 0).collect();
        v.sort_unstable();
        let mut out: Vec<(u32, u32)> = Vec::with_capacity(v.len());
        for (e, c) in v {
            match out.last_mut() {
                Some(last) if last.0 == e => last.1 += c,
                _ => out.push((e, c)),
            }
        }
        TypeVector(out)
    }

    /// Multiset of edge labels, one entry per socket.
    pub fn from_labels(labels: impl IntoIterator<Item = u32>) -> Self {
        Self::from_pairs(labels.into_iter().map(|e| (e, 1)))
    }

    /// Unit vector `e_j`.
    pub fn unit(edge: u32) -> Self {
        TypeVector(vec![(edge, 1)])
    }

    pub fn entries(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn get(&self, edge: u32) -> u32 {
        self.0
            .binary_search_by_key(&edge, |&(e, _)| e)
            .map_or(0, |i| self.0[i].1)
    }

    /// `|c|`, the total number of sockets.
    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, c)| c).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Edge type of a degree-one vector.
    pub fn as_unit(&self) -> Option<u32> {
        match self.0.as_slice() {
            [(e, 1)] => Some(*e),
            _ => None,
        }
    }

    /// Componentwise `self <= other`.
    pub fn is_sub_of(&self, other: &TypeVector) -> bool {
        self.0.iter().all(|&(e, c)| c <= other.get(e))
    }

    /// Number of componentwise sub-vectors, `prod_j (c_j + 1)`.
    pub fn sub_vector_count(&self) -> usize {
        self.0.iter().map(|&(_, c)| c as usize + 1).product()
    }

    /// All componentwise sub-vectors, including the empty vector and `self`.
    pub fn sub_vectors(&self) -> Vec<TypeVector> {
        let mut out = vec![Vec::new()];
        for &(e, c) in &self.0 {
            let mut next = Vec::with_capacity(out.len() * (c as usize + 1));
            for prefix in &out {
                for k in 0..=c {
                    let mut v: Vec<(u32, u32)> = prefix.clone();
                    if k > 0 {
                        v.push((e, k));
                    }
                    next.push(v);
                }
            }
            out = next;
        }
        out.into_iter().map(TypeVector).collect()
    }
}

impl fmt::Display for TypeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (e, c)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}:{c}")?;
        }
        write!(f, "}}")
    }
}

/// VN and CN type tables of a base matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeTypeTables {
    pub edge_type_count: usize,
    /// `F_v`, one entry per base column.
    pub vn_types: Vec<TypeVector>,
    /// `F_c`, one entry per base row.
    pub cn_types: Vec<TypeVector>,
    /// Unique VN type (column) incident to each edge type.
    pub vn_of_edge: Vec<usize>,
    /// Unique CN type (row) incident to each edge type.
    pub cn_of_edge: Vec<usize>,
}

impl NodeTypeTables {
    pub fn from_base(base: &BaseMatrix) -> Result<Self> {
        base.validate()?;
        let m = base.edge_type_count();
        let mut vn_pairs = vec![Vec::new(); base.col_count()];
        let mut cn_pairs = vec![Vec::new(); base.row_count()];
        let mut vn_of_edge = vec![usize::MAX; m];
        let mut cn_of_edge = vec![usize::MAX; m];
        for slot in &base.edge_labels {
            let mult = base.entry(slot.row, slot.col);
            vn_pairs[slot.col].push((slot.label as u32, mult));
            cn_pairs[slot.row].push((slot.label as u32, mult));
            vn_of_edge[slot.label] = slot.col;
            cn_of_edge[slot.label] = slot.row;
        }
        if vn_of_edge.contains(&usize::MAX) {
            return Err(Error::InvalidEnsemble("edge type without a VN type".into()));
        }
        Ok(NodeTypeTables {
            edge_type_count: m,
            vn_types: vn_pairs.into_iter().map(TypeVector::from_pairs).collect(),
            cn_types: cn_pairs.into_iter().map(TypeVector::from_pairs).collect(),
            vn_of_edge,
            cn_of_edge,
        })
    }

    /// `|F̄_c| = sum over c in F_c of prod_j (c_j + 1)`.
    pub fn residual_cn_type_count(&self) -> usize {
        self.cn_types.iter().map(TypeVector::sub_vector_count).sum()
    }

    /// `F̄_c`, grouped by the full CN type each residual type derives from.
    pub fn residual_cn_types(&self) -> Vec<Vec<TypeVector>> {
        self.cn_types.iter().map(TypeVector::sub_vectors).collect()
    }

    /// `m` counted from the CN side, `sum_c sum_j 1[c_j > 0]`.
    pub fn edge_types_from_cns(&self) -> usize {
        self.cn_types.iter().map(|c| c.entries().len()).sum()
    }

    /// `m` counted from the VN side.
    pub fn edge_types_from_vns(&self) -> usize {
        self.vn_types.iter().map(|v| v.entries().len()).sum()
    }
}
