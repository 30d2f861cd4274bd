//! Ensemble description shared by graph evolution and density evolution:
//! VN types and full CN types with counts normalised by `M`, the number of
//! VNs per chain position.

use serde::{Deserialize, Serialize};

use crate::ensemble::{BaseMatrix, CoupledEnsembleSpec, NodeTypeTables, TypeVector, Variant};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VnClass {
    pub edges: TypeVector,
    /// `L_v / M`.
    pub count: f64,
    /// Punctured VNs are never transmitted; evolution starts them erased.
    pub punctured: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CnClass {
    pub edges: TypeVector,
    /// `R_c / M` before transmission.
    pub count: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticEnsemble {
    pub label: String,
    pub chain_len: usize,
    pub edge_type_count: usize,
    pub vn_classes: Vec<VnClass>,
    pub cn_classes: Vec<CnClass>,
    /// The VN class owning each edge type.
    pub vn_of_edge: Vec<usize>,
}

impl AnalyticEnsemble {
    pub fn from_spec(spec: &CoupledEnsembleSpec) -> Result<Self> {
        match spec.variant {
            Variant::Protograph | Variant::Uncoupled => {
                let base = BaseMatrix::build(spec)?;
                let tables = NodeTypeTables::from_base(&base)?;
                Self::from_tables(&tables, spec.k(), spec.chain_len, spec.label())
            }
            Variant::RandomU => Self::random_u(spec),
        }
    }

    /// Protograph lifting: every base column and row becomes `N` nodes and
    /// `M = kN`, so each type has normalised count `1/k`.
    pub fn from_tables(tables: &NodeTypeTables, k: usize, chain_len: usize, label: String) -> Result<Self> {
        let w = 1.0 / k as f64;
        let ens = AnalyticEnsemble {
            label,
            chain_len,
            edge_type_count: tables.edge_type_count,
            vn_classes: tables
                .vn_types
                .iter()
                .map(|v| VnClass {
                    edges: v.clone(),
                    count: w,
                    punctured: false,
                })
                .collect(),
            cn_classes: tables
                .cn_types
                .iter()
                .map(|c| CnClass {
                    edges: c.clone(),
                    count: w,
                })
                .collect(),
            vn_of_edge: tables.vn_of_edge.clone(),
        };
        ens.validate()?;
        Ok(ens)
    }

    /// Large-`M` model of the `(l,r,L)_u` chain. One VN class per position
    /// (count 1) with one edge of type `(u, p)` to each CN position
    /// `p = u..u+l-1`. A CN at position `p` has `r` sockets, each filled by
    /// an edge from origin `u` with probability `1/l` (for every valid
    /// origin) or left empty, giving multinomial CN compositions; CNs per
    /// position number `M/k`.
    pub fn random_u(spec: &CoupledEnsembleSpec) -> Result<Self> {
        spec.validate()?;
        let (l, r, len) = (spec.l, spec.r, spec.chain_len);
        let positions = len + l - 1;
        let origins = |p: usize| p.saturating_sub(l - 1)..=p.min(len - 1);
        // edge types labelled in (CN position, VN position) order
        let mut edge_of = vec![vec![u32::MAX; len]; positions];
        let mut vn_of_edge = Vec::new();
        for (p, row) in edge_of.iter_mut().enumerate() {
            for u in origins(p) {
                row[u] = vn_of_edge.len() as u32;
                vn_of_edge.push(u);
            }
        }
        let vn_classes = (0..len)
            .map(|u| VnClass {
                edges: TypeVector::from_labels((u..u + l).map(|p| edge_of[p][u])),
                count: 1.0,
                punctured: false,
            })
            .collect();
        let per_cn = 1.0 / spec.k() as f64;
        let mut cn_classes = Vec::new();
        for (p, row) in edge_of.iter().enumerate() {
            let us: Vec<usize> = origins(p).collect();
            let p_fill = 1.0 / l as f64;
            let p_empty = 1.0 - us.len() as f64 * p_fill;
            for comp in compositions(us.len(), r) {
                let filled: usize = comp.iter().sum();
                let prob = multinomial(r, &comp) * p_fill.powi(filled as i32) * p_empty.powi((r - filled) as i32);
                if prob == 0.0 {
                    continue;
                }
                cn_classes.push(CnClass {
                    edges: TypeVector::from_pairs(us.iter().zip(&comp).map(|(&u, &n)| (row[u], n as u32))),
                    count: per_cn * prob,
                });
            }
        }
        let ens = AnalyticEnsemble {
            label: spec.label(),
            chain_len: len,
            edge_type_count: vn_of_edge.len(),
            vn_classes,
            cn_classes,
            vn_of_edge,
        };
        ens.validate()?;
        Ok(ens)
    }

    /// Total VN mass, `L` for a chain of `L` positions.
    pub fn total_vn_mass(&self) -> f64 {
        self.vn_classes.iter().map(|v| v.count).sum()
    }

    /// Per-edge-type socket mass seen from the VN side.
    pub fn vn_edge_mass(&self) -> Vec<f64> {
        let mut mass = vec![0.0; self.edge_type_count];
        for v in &self.vn_classes {
            for &(j, d) in v.edges.entries() {
                mass[j as usize] += v.count * d as f64;
            }
        }
        mass
    }

    pub fn cn_edge_mass(&self) -> Vec<f64> {
        let mut mass = vec![0.0; self.edge_type_count];
        for c in &self.cn_classes {
            for &(j, d) in c.edges.entries() {
                mass[j as usize] += c.count * d as f64;
            }
        }
        mass
    }

    pub fn validate(&self) -> Result<()> {
        if self.vn_of_edge.len() != self.edge_type_count {
            return Err(Error::InvalidEnsemble("vn_of_edge has the wrong length".into()));
        }
        for (j, &v) in self.vn_of_edge.iter().enumerate() {
            let owners = self.vn_classes.iter().filter(|c| c.edges.get(j as u32) > 0).count();
            if owners != 1 || self.vn_classes.get(v).is_none_or(|c| c.edges.get(j as u32) == 0) {
                return Err(Error::InvalidEnsemble(format!("edge type {j} needs exactly one VN class")));
            }
        }
        for (j, (a, b)) in self.vn_edge_mass().iter().zip(self.cn_edge_mass()).enumerate() {
            if (a - b).abs() > 1e-9 * a.max(1.0) {
                return Err(Error::InvalidEnsemble(format!(
                    "edge type {j}: VN socket mass {a} != CN socket mass {b}"
                )));
            }
        }
        Ok(())
    }
}

/// All `parts`-tuples of non-negative integers with sum at most `total`.
fn compositions(parts: usize, total: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; parts];
    fn rec(i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for n in 0..=left {
            cur[i] = n;
            rec(i + 1, left - n, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, total, &mut cur, &mut out);
    out
}

/// `total! / (prod n_i! * (total - sum n_i)!)`.
fn multinomial(total: usize, parts: &[usize]) -> f64 {
    let mut left = total;
    let mut coef = 1.0;
    for &n in parts {
        coef *= binomial(left, n);
        left -= n;
    }
    coef
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn protograph_masses() {
        let spec = CoupledEnsembleSpec::protograph(3, 6, 5).unwrap();
        let e = AnalyticEnsemble::from_spec(&spec).unwrap();
        assert_eq!(e.vn_classes.len(), 10);
        assert_eq!(e.cn_classes.len(), 7);
        assert!((e.total_vn_mass() - 5.0).abs() < 1e-12);
        assert!(e.vn_edge_mass().iter().all(|&m| (m - 0.5).abs() < 1e-12));
    }

    #[test]
    fn random_u_masses_conserve() {
        let spec = CoupledEnsembleSpec::random_u(3, 6, 6).unwrap();
        let e = AnalyticEnsemble::from_spec(&spec).unwrap();
        assert_eq!(e.edge_type_count, 18);
        assert!((e.total_vn_mass() - 6.0).abs() < 1e-12);
        // CN count per position is M/k regardless of position
        let total_cn: f64 = e.cn_classes.iter().map(|c| c.count).sum();
        assert!((total_cn - 8.0 * 0.5).abs() < 1e-12);
        // boundary positions carry partially filled CNs, interior ones do not
        assert!(e.cn_classes.iter().any(|c| c.edges.degree() < 6 && c.count > 0.0));
        let full: f64 = e.cn_classes.iter().filter(|c| c.edges.degree() == 6).map(|c| c.count).sum();
        assert!(full > 4.0 * 0.5 - 1e-12);
    }

    #[test]
    fn helpers() {
        assert_eq!(compositions(2, 2).len(), 6);
        assert_eq!(binomial(6, 2), 15.0);
        assert_eq!(multinomial(6, &[2, 2, 2]), 90.0);
    }
}
