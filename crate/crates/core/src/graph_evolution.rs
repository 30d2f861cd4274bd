//! Expected evolution of the residual type degree distribution under the
//! parallel peeling decoder.
//!
//! One step: every deg-1 CN resolves its VN. A VN of type `v` survives when
//! none of its edges lands in a deg-1 CN, each edge of type `j` doing so with
//! probability `p_dir,j = r_{e_j} / sum_c c_j r_c`. A CN with two or more
//! residual edges loses an edge of type `j` when the VN behind it was
//! resolved through one of its other edges,
//! `q_j = 1 - (1 - p_dir)^(v - e_j)`, independently per edge. Deg-1 CNs are
//! consumed. CNs that become deg-1 during the step are peeled in the next one.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::analytic::{binomial, AnalyticEnsemble};
use crate::ensemble::TypeVector;
use crate::plateau::{self, Plateau};
use crate::{Error, Result};

/// Tolerance on negative masses and on edge conservation.
pub const MASS_TOL: f64 = 1e-9;
/// Trajectories stop once `c1` or the unresolved mass drops below this.
pub const STOP_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
struct Transition {
    target: usize,
    /// Kept multiplicity per entry of the source type.
    kept: Vec<u32>,
    coef: f64,
}

/// Precomputed residual type space and transition structure.
#[derive(Clone, Debug)]
pub struct GeModel {
    label: String,
    edge_type_count: usize,
    vn_edges: Vec<TypeVector>,
    vn_counts: Vec<f64>,
    vn_punctured: Vec<bool>,
    vn_mass: f64,
    cn_full: Vec<(TypeVector, f64)>,
    types: Vec<TypeVector>,
    index: HashMap<TypeVector, usize>,
    unit_of_edge: Vec<usize>,
    vn_of_edge: Vec<usize>,
    transitions: Vec<Vec<Transition>>,
}

fn sub_transitions(c: &TypeVector, index: &HashMap<TypeVector, usize>) -> Vec<Transition> {
    let entries = c.entries();
    let mut out = Vec::new();
    let mut kept = vec![0u32; entries.len()];
    loop {
        let sub = TypeVector::from_pairs(entries.iter().zip(&kept).map(|(&(j, _), &k)| (j, k)));
        let coef = entries
            .iter()
            .zip(&kept)
            .map(|(&(_, d), &k)| binomial(d as usize, k as usize))
            .product();
        out.push(Transition {
            target: index[&sub],
            kept: kept.clone(),
            coef,
        });
        // odometer over 0..=c_j
        let mut i = 0;
        loop {
            if i == entries.len() {
                return out;
            }
            if kept[i] < entries[i].1 {
                kept[i] += 1;
                break;
            }
            kept[i] = 0;
            i += 1;
        }
    }
}

impl GeModel {
    pub fn new(ens: &AnalyticEnsemble) -> Result<Self> {
        ens.validate()?;
        let mut set = BTreeMap::new();
        for c in &ens.cn_classes {
            for s in c.edges.sub_vectors() {
                set.insert(s, ());
            }
        }
        for j in 0..ens.edge_type_count as u32 {
            set.insert(TypeVector::unit(j), ());
        }
        set.insert(TypeVector::empty(), ());
        let types: Vec<TypeVector> = set.into_keys().collect();
        let index: HashMap<TypeVector, usize> = types.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        let unit_of_edge = (0..ens.edge_type_count as u32).map(|j| index[&TypeVector::unit(j)]).collect();
        let transitions = types
            .iter()
            .map(|t| if t.degree() >= 2 { sub_transitions(t, &index) } else { Vec::new() })
            .collect();
        Ok(GeModel {
            label: ens.label.clone(),
            edge_type_count: ens.edge_type_count,
            vn_edges: ens.vn_classes.iter().map(|v| v.edges.clone()).collect(),
            vn_counts: ens.vn_classes.iter().map(|v| v.count).collect(),
            vn_punctured: ens.vn_classes.iter().map(|v| v.punctured).collect(),
            vn_mass: ens.total_vn_mass(),
            cn_full: ens.cn_classes.iter().map(|c| (c.edges.clone(), c.count)).collect(),
            types,
            index,
            unit_of_edge,
            vn_of_edge: ens.vn_of_edge.clone(),
            transitions,
        })
    }

    pub fn from_spec(spec: &crate::ensemble::CoupledEnsembleSpec) -> Result<Self> {
        Self::new(&AnalyticEnsemble::from_spec(spec)?)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Residual CN types tracked, sorted.
    pub fn residual_types(&self) -> &[TypeVector] {
        &self.types
    }

    pub fn type_index(&self, t: &TypeVector) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn vn_mass(&self) -> f64 {
        self.vn_mass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeDegreeDistribution {
    pub iteration: usize,
    /// `l_v` per VN class, normalised by `M`.
    pub l_v: Vec<f64>,
    /// `r_c` per residual CN type of the model, normalised by `M`.
    pub r_c: Vec<f64>,
}

impl TypeDegreeDistribution {
    /// Deg-1 CN mass `c1 = sum_j r_{e_j}`.
    pub fn c1(&self, model: &GeModel) -> f64 {
        model.unit_of_edge.iter().map(|&i| self.r_c[i]).sum()
    }

    pub fn unresolved_mass(&self) -> f64 {
        self.l_v.iter().sum()
    }

    /// Unresolved fraction per chain position.
    pub fn unresolved_fraction(&self, model: &GeModel) -> f64 {
        self.unresolved_mass() / model.vn_mass
    }

    pub fn total_cn_mass(&self) -> f64 {
        self.r_c.iter().sum()
    }

    fn vn_socket_mass(&self, model: &GeModel) -> Vec<f64> {
        let mut s = vec![0.0; model.edge_type_count];
        for (v, &l) in model.vn_edges.iter().zip(&self.l_v) {
            for &(j, d) in v.entries() {
                s[j as usize] += d as f64 * l;
            }
        }
        s
    }

    fn cn_socket_mass(&self, model: &GeModel) -> Vec<f64> {
        let mut s = vec![0.0; model.edge_type_count];
        for (t, &r) in model.types.iter().zip(&self.r_c) {
            for &(j, d) in t.entries() {
                s[j as usize] += d as f64 * r;
            }
        }
        s
    }

    /// Largest per-edge-type gap between VN-side and CN-side residual edges.
    pub fn edge_conservation_error(&self, model: &GeModel) -> f64 {
        self.vn_socket_mass(model)
            .iter()
            .zip(self.cn_socket_mass(model))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Nonzero CN masses keyed by the printed type vector.
    pub fn cn_map(&self, model: &GeModel) -> BTreeMap<String, f64> {
        model
            .types
            .iter()
            .zip(&self.r_c)
            .filter(|(_, &r)| r > 0.0)
            .map(|(t, &r)| (t.to_string(), r))
            .collect()
    }
}

pub fn initial_dd(model: &GeModel, epsilon: f64) -> Result<TypeDegreeDistribution> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} outside [0,1]")));
    }
    let l_v = model
        .vn_counts
        .iter()
        .zip(&model.vn_punctured)
        .map(|(&n, &p)| if p { n } else { epsilon * n })
        .collect();
    let mut r_c = vec![0.0; model.types.len()];
    for (c, w) in &model.cn_full {
        if c.is_empty() {
            r_c[model.index[c]] += w;
            continue;
        }
        // every socket of a full CN is erased iff its VN is
        let q: Vec<f64> = c
            .entries()
            .iter()
            .map(|&(j, _)| {
                let v = model.vn_of_edge[j as usize];
                if model.vn_punctured[v] {
                    1.0
                } else {
                    epsilon
                }
            })
            .collect();
        for t in sub_transitions(c, &model.index) {
            let p: f64 = c
                .entries()
                .iter()
                .zip(&t.kept)
                .zip(&q)
                .map(|((&(_, d), &k), &e)| e.powi(k as i32) * (1.0 - e).powi((d - k) as i32))
                .product();
            r_c[t.target] += w * t.coef * p;
        }
    }
    Ok(TypeDegreeDistribution { iteration: 0, l_v, r_c })
}

/// `p_dir,j`: probability that an edge of type `j` ends in a deg-1 CN.
pub fn pdir(model: &GeModel, dd: &TypeDegreeDistribution) -> Vec<f64> {
    let denom = dd.cn_socket_mass(model);
    model
        .unit_of_edge
        .iter()
        .zip(&denom)
        .map(|(&u, &d)| if d > 0.0 { (dd.r_c[u] / d).clamp(0.0, 1.0) } else { 0.0 })
        .collect()
}

pub fn expected_step(model: &GeModel, dd: &TypeDegreeDistribution) -> Result<TypeDegreeDistribution> {
    let p = pdir(model, dd);
    // survival of each VN class and of each edge seen from its CN
    let mut l_v = dd.l_v.clone();
    let mut keep_edge = vec![1.0; model.edge_type_count];
    for (i, v) in model.vn_edges.iter().enumerate() {
        let stay: f64 = v.entries().iter().map(|&(j, d)| (1.0 - p[j as usize]).powi(d as i32)).product();
        l_v[i] *= stay;
        for &(j, _) in v.entries() {
            let pj = 1.0 - p[j as usize];
            keep_edge[j as usize] = if pj > 0.0 {
                stay / pj
            } else {
                // another edge of this VN may still be direct
                v.entries()
                    .iter()
                    .map(|&(i2, d2)| {
                        let e = if i2 == j { d2 - 1 } else { d2 };
                        (1.0 - p[i2 as usize]).powi(e as i32)
                    })
                    .product()
            };
        }
    }
    let empty = model.index[&TypeVector::empty()];
    let mut r_c = vec![0.0; model.types.len()];
    for (idx, (t, &mass)) in model.types.iter().zip(&dd.r_c).enumerate() {
        if mass == 0.0 {
            continue;
        }
        match t.degree() {
            0 => r_c[idx] += mass,
            1 => r_c[empty] += mass,
            _ => {
                for tr in &model.transitions[idx] {
                    let prob: f64 = t
                        .entries()
                        .iter()
                        .zip(&tr.kept)
                        .map(|(&(j, d), &k)| {
                            let s = keep_edge[j as usize];
                            s.powi(k as i32) * (1.0 - s).powi((d - k) as i32)
                        })
                        .product();
                    r_c[tr.target] += mass * tr.coef * prob;
                }
            }
        }
    }
    for v in l_v.iter_mut().chain(r_c.iter_mut()) {
        if *v < -MASS_TOL {
            return Err(Error::Numerical(format!("negative mass {v} after step")));
        }
        *v = v.max(0.0);
    }
    Ok(TypeDegreeDistribution {
        iteration: dd.iteration + 1,
        l_v,
        r_c,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTrajectory {
    pub ensemble: String,
    pub epsilon: f64,
    /// `c1(l)`, normalised by `M`.
    pub c1: Vec<f64>,
    /// Unresolved fraction per chain position.
    pub unresolved: Vec<f64>,
    pub success: bool,
    pub snapshots: Option<Vec<TypeDegreeDistribution>>,
}

impl EvolutionTrajectory {
    /// Plateau of `c1`, the critical phase.
    pub fn c1_plateau(&self) -> Option<Plateau> {
        plateau::detect(&self.c1, plateau::DEFAULT_BAND)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,c1,unresolved_fraction\n");
        for (l, (c, u)) in self.c1.iter().zip(&self.unresolved).enumerate() {
            out.push_str(&format!("{l},{c},{u}\n"));
        }
        out
    }

    /// Full distributions per iteration, when recorded.
    pub fn snapshots_json(&self, model: &GeModel) -> Result<String> {
        let snaps = self
            .snapshots
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("trajectory was run without snapshots".into()))?;
        let rows: Vec<serde_json::Value> = snaps
            .iter()
            .map(|s| {
                serde_json::json!({
                    "iteration": s.iteration,
                    "l_v": s.l_v,
                    "r_c": s.cn_map(model),
                })
            })
            .collect();
        Ok(serde_json::to_string(&rows)?)
    }
}

pub fn run_ge(model: &GeModel, epsilon: f64, max_iters: usize, keep_snapshots: bool) -> Result<EvolutionTrajectory> {
    let mut dd = initial_dd(model, epsilon)?;
    let mut traj = EvolutionTrajectory {
        ensemble: model.label.clone(),
        epsilon,
        c1: vec![dd.c1(model)],
        unresolved: vec![dd.unresolved_fraction(model)],
        success: false,
        snapshots: keep_snapshots.then(|| vec![dd.clone()]),
    };
    while dd.iteration < max_iters && dd.c1(model) >= STOP_TOL && dd.unresolved_mass() >= STOP_TOL {
        dd = expected_step(model, &dd)?;
        traj.c1.push(dd.c1(model));
        traj.unresolved.push(dd.unresolved_fraction(model));
        if let Some(s) = traj.snapshots.as_mut() {
            s.push(dd.clone());
        }
    }
    traj.success = dd.unresolved_mass() < STOP_TOL;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{CnClass, VnClass};
    use crate::density_evolution::{run_de, DeModel, DeOptions};
    use crate::ensemble::CoupledEnsembleSpec;

    fn proto(l: usize, r: usize, len: usize) -> GeModel {
        GeModel::from_spec(&CoupledEnsembleSpec::protograph(l, r, len).unwrap()).unwrap()
    }

    fn tiny(vn: Vec<TypeVector>, cn: Vec<TypeVector>, m: usize) -> GeModel {
        let mut vn_of_edge = vec![0; m];
        for (i, v) in vn.iter().enumerate() {
            for &(j, _) in v.entries() {
                vn_of_edge[j as usize] = i;
            }
        }
        GeModel::new(&AnalyticEnsemble {
            label: "tiny".into(),
            chain_len: 1,
            edge_type_count: m,
            vn_classes: vn
                .into_iter()
                .map(|edges| VnClass {
                    edges,
                    count: 1.0,
                    punctured: false,
                })
                .collect(),
            cn_classes: cn.into_iter().map(|edges| CnClass { edges, count: 1.0 }).collect(),
            vn_of_edge,
        })
        .unwrap()
    }

    #[test]
    fn initial_extremes() {
        let g = proto(3, 6, 3);
        // 104 residual types per CN row; the five empty types coincide here
        assert_eq!(g.residual_types().len(), 100);
        let d0 = initial_dd(&g, 0.0).unwrap();
        assert!(d0.l_v.iter().all(|&v| v == 0.0));
        let empty = g.type_index(&TypeVector::empty()).unwrap();
        assert!(d0.r_c.iter().enumerate().all(|(i, &r)| (i == empty) == (r > 0.0)));
        let d1 = initial_dd(&g, 1.0).unwrap();
        assert!(d1.r_c.iter().zip(g.residual_types()).all(|(&r, t)| r == 0.0 || t.degree() as usize == 6
            || g.cn_full.iter().any(|(c, _)| c == t)));
        assert!(initial_dd(&g, 1.5).is_err());
    }

    #[test]
    fn binomial_split_of_pair_cn() {
        let g = tiny(
            vec![TypeVector::from_labels([0]), TypeVector::from_labels([1])],
            vec![TypeVector::from_labels([0, 1])],
            2,
        );
        let d = initial_dd(&g, 0.5).unwrap();
        for t in [vec![], vec![0], vec![1], vec![0, 1]] {
            let i = g.type_index(&TypeVector::from_labels(t)).unwrap();
            assert!((d.r_c[i] - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn pdir_values() {
        let g = tiny(
            vec![TypeVector::from_labels([0]), TypeVector::from_labels([1])],
            vec![TypeVector::from_labels([0, 1])],
            2,
        );
        let mut d = initial_dd(&g, 0.0).unwrap();
        assert!(pdir(&g, &d).iter().all(|&p| p == 0.0));
        d.r_c[g.type_index(&TypeVector::unit(0)).unwrap()] = 0.1;
        d.r_c[g.type_index(&TypeVector::from_labels([0, 1])).unwrap()] = 0.3;
        let p = pdir(&g, &d);
        assert!((p[0] - 0.25).abs() < 1e-15);
        assert_eq!(p[1], 0.0);
    }

    #[test]
    fn fixed_point_without_deg1() {
        let g = proto(3, 6, 3);
        let mut d = initial_dd(&g, 0.4).unwrap();
        for &u in &g.unit_of_edge {
            d.r_c[u] = 0.0;
        }
        let n = expected_step(&g, &d).unwrap();
        assert_eq!(n.l_v, d.l_v);
        assert_eq!(n.r_c, d.r_c);
    }

    #[test]
    fn single_deg1_resolves_everything() {
        let g = tiny(vec![TypeVector::unit(0)], vec![TypeVector::unit(0)], 1);
        let d = initial_dd(&g, 1.0).unwrap();
        let n = expected_step(&g, &d).unwrap();
        assert_eq!(n.unresolved_mass(), 0.0);
        assert_eq!(n.c1(&g), 0.0);
    }

    #[test]
    fn conservation_and_monotone() {
        for spec in [
            CoupledEnsembleSpec::protograph(3, 6, 8).unwrap(),
            CoupledEnsembleSpec::random_u(3, 6, 8).unwrap(),
            CoupledEnsembleSpec::protograph(4, 8, 5).unwrap(),
        ] {
            let g = GeModel::from_spec(&spec).unwrap();
            let mut d = initial_dd(&g, 0.47).unwrap();
            let cn0 = d.total_cn_mass();
            for _ in 0..60 {
                let n = expected_step(&g, &d).unwrap();
                assert!(n.edge_conservation_error(&g) < MASS_TOL);
                assert!(n.unresolved_mass() <= d.unresolved_mass() + 1e-15);
                assert!((n.total_cn_mass() - cn0).abs() < 1e-9);
                d = n;
            }
        }
    }

    #[test]
    fn matches_density_evolution() {
        for spec in [
            CoupledEnsembleSpec::protograph(3, 6, 10).unwrap(),
            CoupledEnsembleSpec::random_u(3, 6, 10).unwrap(),
        ] {
            let g = GeModel::from_spec(&spec).unwrap();
            let de = DeModel::from_spec(&spec).unwrap();
            for eps in [0.3, 0.45, 0.55] {
                let ge = run_ge(&g, eps, 400, false).unwrap();
                let dt = run_de(&de, eps, DeOptions::default()).unwrap();
                for (a, b) in ge.unresolved.iter().zip(&dt.eps) {
                    assert!((a - b).abs() < 1e-9, "{spec} eps={eps}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn stalls_above_threshold() {
        let g = proto(3, 6, 6);
        let t = run_ge(&g, 0.7, 1000, false).unwrap();
        assert!(!t.success);
        assert!(*t.c1.last().unwrap() < STOP_TOL);
        assert!(*t.unresolved.last().unwrap() > 0.1);
        let z = run_ge(&g, 0.0, 10, true).unwrap();
        assert!(z.success && z.c1.len() == 1);
        assert!(z.snapshots_json(&g).unwrap().starts_with('['));
    }
}
