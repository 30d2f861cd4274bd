use serde::{Deserialize, Serialize};

use super::ppd;
use crate::channel::ResidualGraph;

/// Maximal stopping set of a residual graph (the union of all stopping sets)
/// with a per-CN witness.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoppingSetReport {
    /// Local VN indices, sorted.
    pub vns: Vec<u32>,
    /// `(cn, edges into the set)` for every CN touching the set.
    pub witness: Vec<(u32, u32)>,
}

impl StoppingSetReport {
    pub fn is_empty(&self) -> bool {
        self.vns.is_empty()
    }

    /// Re-derives the witness in one pass over the set's edges and checks
    /// every touching CN has at least two edges into the set.
    pub fn verify(&self, residual: &ResidualGraph) -> bool {
        let mut inside = vec![false; residual.vn_count()];
        for &v in &self.vns {
            inside[v as usize] = true;
        }
        let mut touch = vec![0u32; residual.cn_count()];
        for &v in &self.vns {
            for &c in residual.vn_neighbors(v as usize) {
                touch[c as usize] += 1;
            }
        }
        let derived: Vec<(u32, u32)> = touch
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(c, &k)| (c as u32, k))
            .collect();
        derived == self.witness && derived.iter().all(|&(_, k)| k >= 2)
    }
}

/// Peels to the fixed point; what is left is the maximal stopping set.
pub fn find_stopping_sets(residual: &ResidualGraph) -> StoppingSetReport {
    let vns = ppd(residual).remaining;
    let mut touch = vec![0u32; residual.cn_count()];
    for &v in &vns {
        for &c in residual.vn_neighbors(v as usize) {
            touch[c as usize] += 1;
        }
    }
    let witness = touch
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(c, &k)| (c as u32, k))
        .collect();
    StoppingSetReport { vns, witness }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoders::fixtures::*;

    #[test]
    fn decodable_residual_has_no_stopping_set() {
        let r = chain(6);
        let rep = find_stopping_sets(&r);
        assert!(rep.is_empty());
        assert!(rep.verify(&r));
    }

    #[test]
    fn cycle_is_reported() {
        let r = cycle();
        let rep = find_stopping_sets(&r);
        assert_eq!(rep.vns, vec![0, 1]);
        assert_eq!(rep.witness, vec![(0, 2), (1, 2)]);
        assert!(rep.verify(&r));
    }

    #[test]
    fn verify_rejects_non_stopping_sets() {
        let r = path();
        let fake = StoppingSetReport {
            vns: vec![0, 1],
            witness: vec![(0, 1), (1, 2)],
        };
        assert!(!fake.verify(&r));
    }
}
