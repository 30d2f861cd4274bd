use serde::{Deserialize, Serialize};

use super::{CoupledEnsembleSpec, Variant};
use crate::{Error, Result};

/// One labelled nonzero slot of a base matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[usize; 3]", into = "[usize; 3]")]
pub struct EdgeSlot {
    pub row: usize,
    pub col: usize,
    /// Edge type, `0..m`.
    pub label: usize,
}

impl From<[usize; 3]> for EdgeSlot {
    fn from([row, col, label]: [usize; 3]) -> Self {
        EdgeSlot { row, col, label }
    }
}

impl From<EdgeSlot> for [usize; 3] {
    fn from(s: EdgeSlot) -> Self {
        [s.row, s.col, s.label]
    }
}

/// Bi-adjacency matrix of a protograph: rows are CN types, columns VN types,
/// entries are edge multiplicities. Every nonzero slot carries one edge type.
///
/// Serialised as `{l, r, L, variant, rows, edge_labels: [[row, col, label]]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseMatrix {
    pub l: usize,
    pub r: usize,
    #[serde(rename = "L")]
    pub chain_len: usize,
    pub variant: Variant,
    pub rows: Vec<Vec<u32>>,
    pub edge_labels: Vec<EdgeSlot>,
}

impl BaseMatrix {
    /// Coupled chain: VN type `u*k + i` (position `u`, index `i`) connects
    /// once to each CN position `u..u+l-1`. Edge labels follow
    /// `(CN position, VN position, VN index)` order, i.e. row-major order.
    pub fn build(spec: &CoupledEnsembleSpec) -> Result<Self> {
        spec.validate()?;
        let k = spec.k();
        let rows = match spec.variant {
            Variant::Uncoupled => vec![vec![spec.l as u32; k]],
            Variant::Protograph | Variant::RandomU => {
                let cols = k * spec.chain_len;
                let mut rows = vec![vec![0u32; cols]; spec.cn_positions()];
                for u in 0..spec.chain_len {
                    for i in 0..k {
                        for row in rows.iter_mut().skip(u).take(spec.l) {
                            row[u * k + i] = 1;
                        }
                    }
                }
                rows
            }
        };
        let edge_labels = row_major_labels(&rows);
        Ok(BaseMatrix {
            l: spec.l,
            r: spec.r,
            chain_len: spec.chain_len,
            variant: spec.variant,
            rows,
            edge_labels,
        })
    }

    pub fn spec(&self) -> Result<CoupledEnsembleSpec> {
        CoupledEnsembleSpec::new(self.l, self.r, self.chain_len, self.variant)
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Number of edge types `m`.
    pub fn edge_type_count(&self) -> usize {
        self.edge_labels.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> u32 {
        self.rows[row][col]
    }

    pub fn row_sums(&self) -> Vec<u32> {
        self.rows.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u32> {
        let mut sums = vec![0; self.col_count()];
        for row in &self.rows {
            for (s, &e) in sums.iter_mut().zip(row) {
                *s += e;
            }
        }
        sums
    }

    /// Checks shape, label bijectivity and (for built ensembles) degrees.
    pub fn validate(&self) -> Result<()> {
        let cols = self.col_count();
        if self.rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidEnsemble("ragged base matrix".into()));
        }
        let nonzero: usize = self
            .rows
            .iter()
            .map(|r| r.iter().filter(|&&e| e > 0).count())
            .sum();
        if nonzero != self.edge_labels.len() {
            return Err(Error::InvalidEnsemble(format!(
                "{} nonzero slots but {} edge labels",
                nonzero,
                self.edge_labels.len()
            )));
        }
        let mut seen = vec![false; self.edge_labels.len()];
        for slot in &self.edge_labels {
            if slot.row >= self.rows.len() || slot.col >= cols {
                return Err(Error::InvalidEnsemble(format!("slot {slot:?} out of range")));
            }
            if self.rows[slot.row][slot.col] == 0 {
                return Err(Error::InvalidEnsemble(format!("slot {slot:?} labels a zero entry")));
            }
            match seen.get_mut(slot.label) {
                Some(s) if !*s => *s = true,
                _ => {
                    return Err(Error::InvalidEnsemble(format!(
                        "label {} duplicated or out of range",
                        slot.label
                    )))
                }
            }
        }
        if self.col_sums().iter().any(|&s| s as usize != self.l) {
            return Err(Error::InvalidEnsemble(format!("a column does not sum to l = {}", self.l)));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let base: BaseMatrix = serde_json::from_str(s)?;
        base.validate()?;
        Ok(base)
    }
}

fn row_major_labels(rows: &[Vec<u32>]) -> Vec<EdgeSlot> {
    let mut labels = Vec::new();
    for (row, entries) in rows.iter().enumerate() {
        for (col, &e) in entries.iter().enumerate() {
            if e > 0 {
                labels.push(EdgeSlot {
                    row,
                    col,
                    label: labels.len(),
                });
            }
        }
    }
    labels
}

#[cfg(test)]
mod tests {
    use super::*;

    fn proto(l: usize, r: usize, len: usize) -> BaseMatrix {
        BaseMatrix::build(&CoupledEnsembleSpec::protograph(l, r, len).unwrap()).unwrap()
    }

    #[test]
    fn coupled_3_6_3() {
        let b = proto(3, 6, 3);
        assert_eq!(b.row_count(), 5);
        assert_eq!(b.col_count(), 6);
        assert_eq!(b.row_sums(), vec![2, 4, 6, 4, 2]);
        assert!(b.col_sums().iter().all(|&s| s == 3));
        assert_eq!(b.edge_type_count(), 18);
        b.validate().unwrap();
    }

    #[test]
    fn coupled_3_6_1() {
        let b = proto(3, 6, 1);
        assert_eq!(b.row_sums(), vec![2, 2, 2]);
        assert_eq!(b.edge_type_count(), 6);
    }

    #[test]
    fn labels_are_row_major() {
        let b = proto(3, 6, 3);
        let first: Vec<_> = b.edge_labels.iter().take(4).map(|s| (s.row, s.col)).collect();
        assert_eq!(first, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
        assert!(b.edge_labels.iter().enumerate().all(|(i, s)| s.label == i));
    }

    #[test]
    fn symmetric_degree_profile() {
        for (l, r, len) in [(3, 6, 7), (4, 8, 5), (3, 9, 4)] {
            let sums = proto(l, r, len).row_sums();
            let rev: Vec<_> = sums.iter().rev().copied().collect();
            assert_eq!(sums, rev);
            // interior rows sum to r
            if len >= l {
                assert!(sums[l - 1..=len - 1].iter().all(|&s| s as usize == r));
            }
        }
    }

    #[test]
    fn uncoupled_block() {
        let b = BaseMatrix::build(&CoupledEnsembleSpec::uncoupled(3, 6).unwrap()).unwrap();
        assert_eq!(b.rows, vec![vec![3, 3]]);
        assert_eq!(b.edge_type_count(), 2);
    }

    #[test]
    fn json_shape() {
        let b = proto(3, 6, 1);
        let v: serde_json::Value = serde_json::from_str(&b.to_json().unwrap()).unwrap();
        assert_eq!(v["L"], 1);
        assert_eq!(v["variant"], "protograph");
        assert_eq!(v["edge_labels"][0], serde_json::json!([0, 0, 0]));
        assert_eq!(BaseMatrix::from_json(&b.to_json().unwrap()).unwrap(), b);
    }

    #[test]
    fn from_json_rejects_bad_labels() {
        let mut b = proto(3, 6, 1);
        b.edge_labels[1].label = 0;
        assert!(BaseMatrix::from_json(&serde_json::to_string(&b).unwrap()).is_err());
    }
}
