//! Edge-type density evolution for BP on the BEC.
//!
//! The state tracks, per edge type `j`, the erasure probability `x_j` of
//! VN-to-CN messages and `y_j` of CN-to-VN messages. CN classes carry a
//! weight (the random `(l,r,L)_u` model mixes several CN compositions over
//! one edge type), so `y_j` is the socket-weighted average over the classes
//! holding type `j`. For a protograph every type sits in one CN class and
//! the recursion is the plain extrinsic update.

use serde::{Deserialize, Serialize};

use crate::analytic::AnalyticEnsemble;
use crate::plateau::{self, Plateau};
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 200_000;
/// A step that lowers the erased fraction by less than this is a fixed point.
pub const STAGNATION: f64 = 1e-13;

/// Flattened socket lists ready for iteration.
#[derive(Clone, Debug)]
pub struct DeModel {
    label: String,
    edge_type_count: usize,
    chain_len: usize,
    /// CN classes: socket edge types and the class weight divided by the
    /// total CN socket mass of each socket's type.
    cn: Vec<(Vec<u32>, Vec<f64>)>,
    /// VN classes: socket edge types, count, punctured.
    vn: Vec<(Vec<u32>, f64, bool)>,
    vn_mass: f64,
}

fn sockets(t: &crate::ensemble::TypeVector) -> Vec<u32> {
    t.entries()
        .iter()
        .flat_map(|&(j, d)| std::iter::repeat_n(j, d as usize))
        .collect()
}

impl DeModel {
    pub fn new(ens: &AnalyticEnsemble) -> Self {
        let mass = ens.cn_edge_mass();
        let cn = ens
            .cn_classes
            .iter()
            .filter(|c| c.count > 0.0 && !c.edges.is_empty())
            .map(|c| {
                let s = sockets(&c.edges);
                let w = s.iter().map(|&j| c.count / mass[j as usize]).collect();
                (s, w)
            })
            .collect();
        DeModel {
            label: ens.label.clone(),
            edge_type_count: ens.edge_type_count,
            chain_len: ens.chain_len,
            cn,
            vn: ens
                .vn_classes
                .iter()
                .map(|v| (sockets(&v.edges), v.count, v.punctured))
                .collect(),
            vn_mass: ens.total_vn_mass(),
        }
    }

    pub fn from_spec(spec: &crate::ensemble::CoupledEnsembleSpec) -> Result<Self> {
        Ok(Self::new(&AnalyticEnsemble::from_spec(spec)?))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn edge_type_count(&self) -> usize {
        self.edge_type_count
    }

    pub fn chain_len(&self) -> usize {
        self.chain_len
    }

    pub fn vn_class_count(&self) -> usize {
        self.vn.len()
    }

    fn channel(&self, class: usize, epsilon: f64) -> f64 {
        if self.vn[class].2 {
            1.0
        } else {
            epsilon
        }
    }

    pub fn initial_state(&self, epsilon: f64) -> Result<DEState> {
        check_epsilon(epsilon)?;
        let mut x = vec![0.0; self.edge_type_count];
        for (i, (s, _, _)) in self.vn.iter().enumerate() {
            for &j in s {
                x[j as usize] = self.channel(i, epsilon);
            }
        }
        Ok(DEState {
            x,
            y: vec![1.0; self.edge_type_count],
            iteration: 0,
            epsilon,
        })
    }

    /// Per-VN-class erasure probability `eps_ch * prod y^v`.
    pub fn vn_erasure(&self, state: &DEState) -> Vec<f64> {
        self.vn
            .iter()
            .enumerate()
            .map(|(i, (s, _, _))| {
                if state.iteration == 0 {
                    self.channel(i, state.epsilon)
                } else {
                    s.iter().fold(self.channel(i, state.epsilon), |acc, &j| acc * state.y[j as usize])
                }
            })
            .collect()
    }

    /// Unresolved fraction of VNs, normalised per chain position.
    pub fn erased_fraction(&self, state: &DEState) -> f64 {
        let per_class = self.vn_erasure(state);
        self.vn.iter().zip(&per_class).map(|((_, n, _), e)| n * e).sum::<f64>() / self.vn_mass
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} outside [0,1]")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DEState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub iteration: usize,
    pub epsilon: f64,
}

/// Products of `vals` over all positions but one, via prefix/suffix scans.
fn leave_one_out(vals: &[f64], out: &mut Vec<f64>) {
    let n = vals.len();
    out.clear();
    out.resize(n, 1.0);
    let mut acc = 1.0;
    for i in 0..n {
        out[i] = acc;
        acc *= vals[i];
    }
    acc = 1.0;
    for i in (0..n).rev() {
        out[i] *= acc;
        acc *= vals[i];
    }
}

pub fn de_step(state: &DEState, model: &DeModel) -> DEState {
    let m = model.edge_type_count;
    let mut y_known = vec![0.0; m];
    let mut vals = Vec::new();
    let mut loo = Vec::new();
    for (s, w) in &model.cn {
        vals.clear();
        vals.extend(s.iter().map(|&j| 1.0 - state.x[j as usize]));
        leave_one_out(&vals, &mut loo);
        for ((&j, &wi), &p) in s.iter().zip(w).zip(&loo) {
            y_known[j as usize] += wi * p;
        }
    }
    let y: Vec<f64> = y_known.iter().map(|k| (1.0 - k).clamp(0.0, 1.0)).collect();
    let mut x = vec![0.0; m];
    for (i, (s, _, _)) in model.vn.iter().enumerate() {
        vals.clear();
        vals.extend(s.iter().map(|&j| y[j as usize]));
        leave_one_out(&vals, &mut loo);
        let ch = model.channel(i, state.epsilon);
        for (&j, &p) in s.iter().zip(&loo) {
            x[j as usize] = ch * p;
        }
    }
    DEState {
        x,
        y,
        iteration: state.iteration + 1,
        epsilon: state.epsilon,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DETrajectory {
    pub ensemble: String,
    pub epsilon: f64,
    pub chain_len: usize,
    /// `eps[l]`, per-chain unresolved fraction after `l` iterations.
    pub eps: Vec<f64>,
    /// Per-VN-class erasure probabilities, when recorded.
    pub eps_v: Option<Vec<Vec<f64>>>,
    pub converged: bool,
    /// Iterations to success; the predicted decoding time.
    pub iterations: usize,
    pub final_state: DEState,
}

#[derive(Clone, Copy, Debug)]
pub struct DeOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub record_classes: bool,
}

impl Default for DeOptions {
    fn default() -> Self {
        DeOptions {
            tol: DEFAULT_TOL,
            max_iters: DEFAULT_MAX_ITERS,
            record_classes: false,
        }
    }
}

pub fn run_de(model: &DeModel, epsilon: f64, opts: DeOptions) -> Result<DETrajectory> {
    if opts.tol <= 0.0 {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let mut state = model.initial_state(epsilon)?;
    let mut eps = vec![model.erased_fraction(&state)];
    let mut eps_v = opts.record_classes.then(|| vec![model.vn_erasure(&state)]);
    let mut converged = eps[0] < opts.tol;
    while !converged && state.iteration < opts.max_iters {
        state = de_step(&state, model);
        let e = model.erased_fraction(&state);
        if let Some(v) = eps_v.as_mut() {
            v.push(model.vn_erasure(&state));
        }
        let prev = *eps.last().unwrap();
        eps.push(e);
        if e < opts.tol {
            converged = true;
        } else if prev - e < STAGNATION {
            break;
        }
    }
    Ok(DETrajectory {
        ensemble: model.label.clone(),
        epsilon,
        chain_len: model.chain_len,
        iterations: eps.len() - 1,
        eps,
        eps_v,
        converged,
        final_state: state,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub ensemble: String,
    pub eps_star: f64,
    pub tol: f64,
    /// Bisection steps taken.
    pub iterations: usize,
    pub lower: f64,
    pub upper: f64,
}

/// Bisection on `[0, 1]` until the bracket is at most `interval`. Runs that
/// hit `opts.max_iters` count as failures, which biases the estimate low by
/// roughly `tau / max_iters` with `tau` the normalised decoding time.
pub fn threshold(model: &DeModel, interval: f64, opts: DeOptions) -> Result<ThresholdResult> {
    if interval <= 0.0 {
        return Err(Error::InvalidParameter("interval must be positive".into()));
    }
    let opts = DeOptions {
        record_classes: false,
        ..opts
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut steps = 0;
    while hi - lo > interval && steps < 60 {
        let mid = 0.5 * (lo + hi);
        if run_de(model, mid, opts)?.converged {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    Ok(ThresholdResult {
        ensemble: model.label.clone(),
        eps_star: 0.5 * (lo + hi),
        tol: interval,
        iterations: steps,
        lower: lo,
        upper: hi,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaPoint {
    pub iteration: usize,
    pub tau: f64,
    pub eps: f64,
    pub l_delta_eps: f64,
}

/// `(tau, L*delta eps)` per iteration, with `tau = l (eps* - eps)`. Row 0 has
/// nothing resolved.
pub fn delta_eps_trajectory(traj: &DETrajectory, epsilon_star: f64) -> Result<Vec<DeltaPoint>> {
    let gap = epsilon_star - traj.epsilon;
    if gap <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon {} is not below eps* {epsilon_star}",
            traj.epsilon
        )));
    }
    let len = traj.chain_len as f64;
    Ok(traj
        .eps
        .iter()
        .enumerate()
        .map(|(l, &e)| DeltaPoint {
            iteration: l,
            tau: l as f64 * gap,
            eps: e,
            l_delta_eps: if l == 0 { 0.0 } else { len * (traj.eps[l - 1] - e) },
        })
        .collect())
}

pub fn delta_eps_csv(points: &[DeltaPoint]) -> String {
    let mut out = String::from("iteration,tau,eps,L_delta_eps\n");
    for p in points {
        out.push_str(&format!("{},{},{},{}\n", p.iteration, p.tau, p.eps, p.l_delta_eps));
    }
    out
}

/// Plateau of an `L*delta eps` series, divided by `eps* - eps`.
pub fn gamma_from_series(l_delta_eps: &[f64], gap: f64) -> Result<(f64, Plateau)> {
    if gap <= 0.0 {
        return Err(Error::NoPlateau("epsilon is not below eps*".into()));
    }
    let p = plateau::detect(l_delta_eps, plateau::DEFAULT_BAND)
        .ok_or_else(|| Error::NoPlateau("no critical phase in the series".into()))?;
    Ok((p.mean / gap, p))
}

/// Mean over `epsilons` of the DE plateau of `L*delta eps` over `eps* - eps`.
pub fn gamma_estimate(model: &DeModel, epsilon_star: f64, epsilons: &[f64]) -> Result<f64> {
    if epsilons.is_empty() {
        return Err(Error::InvalidParameter("no epsilon values".into()));
    }
    let mut sum = 0.0;
    for &e in epsilons {
        if e >= epsilon_star {
            return Err(Error::NoPlateau(format!("epsilon {e} is not below eps* {epsilon_star}")));
        }
        let traj = run_de(model, e, DeOptions::default())?;
        if !traj.converged {
            return Err(Error::DidNotConverge { epsilon: e });
        }
        let series: Vec<f64> = delta_eps_trajectory(&traj, epsilon_star)?
            .iter()
            .map(|p| p.l_delta_eps)
            .collect();
        sum += gamma_from_series(&series, epsilon_star - e)?.0;
    }
    Ok(sum / epsilons.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::CoupledEnsembleSpec;

    fn model(l: usize, r: usize, len: usize) -> DeModel {
        DeModel::from_spec(&CoupledEnsembleSpec::protograph(l, r, len).unwrap()).unwrap()
    }

    fn scalar_threshold() -> f64 {
        let ok = |e: f64| {
            let mut x = e;
            for _ in 0..100_000 {
                let nx = e * (1.0 - (1.0 - x).powi(5)).powi(2);
                if nx < 1e-12 {
                    return true;
                }
                if x - nx < 1e-15 {
                    return false;
                }
                x = nx;
            }
            false
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn uncoupled_reduces_to_scalar() {
        let m = DeModel::from_spec(&CoupledEnsembleSpec::uncoupled(3, 6).unwrap()).unwrap();
        let mut s = m.initial_state(0.4).unwrap();
        let mut x = 0.4f64;
        for _ in 0..10 {
            s = de_step(&s, &m);
            let y = 1.0 - (1.0 - x).powi(5);
            x = 0.4 * y * y;
            for j in 0..m.edge_type_count() {
                assert!((s.x[j] - x).abs() < 1e-14);
                assert!((s.y[j] - y).abs() < 1e-14);
            }
        }
        let t = threshold(&m, 1e-7, DeOptions::default()).unwrap();
        let oracle = scalar_threshold();
        assert!((oracle - 0.4294).abs() < 5e-4);
        assert!((t.eps_star - oracle).abs() < 1e-5, "{} vs {oracle}", t.eps_star);
    }

    #[test]
    fn zero_channel_and_fixed_point() {
        let m = model(3, 6, 3);
        let s = de_step(&m.initial_state(0.0).unwrap(), &m);
        assert!(s.x.iter().all(|&v| v == 0.0));
        let t = run_de(&m, 0.0, DeOptions::default()).unwrap();
        assert!(t.converged && t.iterations <= 1);
    }

    #[test]
    fn small_chain_dimension_and_monotone() {
        let m = model(3, 6, 3);
        assert_eq!(m.edge_type_count(), 18);
        let mut s = m.initial_state(0.45).unwrap();
        for _ in 0..50 {
            let n = de_step(&s, &m);
            assert!(n.x.iter().zip(&s.x).all(|(a, b)| a <= b));
            s = n;
        }
        let t = run_de(&m, 0.45, DeOptions::default()).unwrap();
        assert!(t.converged);
        assert!(t.eps.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn stalls_above_threshold() {
        let m = model(3, 6, 10);
        let t = run_de(&m, 0.6, DeOptions::default()).unwrap();
        assert!(!t.converged);
        assert!(*t.eps.last().unwrap() > 0.1);
    }

    #[test]
    fn delta_eps_rows() {
        let m = model(3, 6, 20);
        let t = run_de(&m, 0.45, DeOptions::default()).unwrap();
        let d = delta_eps_trajectory(&t, 0.49).unwrap();
        assert_eq!(d[0].tau, 0.0);
        assert!(d.iter().all(|p| p.l_delta_eps >= -1e-15));
        let total: f64 = d.iter().map(|p| p.l_delta_eps).sum();
        assert!((total - 20.0 * (t.eps[0] - t.eps.last().unwrap())).abs() < 1e-9);
        assert!(delta_eps_trajectory(&t, 0.45).is_err());
    }

    #[test]
    fn synthetic_gamma() {
        let gap = 0.04;
        let mut s = vec![0.0, 0.002];
        s.extend(std::iter::repeat_n(0.3 * gap, 30));
        s.extend([0.004, 0.0]);
        let (g, _) = gamma_from_series(&s, gap).unwrap();
        assert!((g - 0.3).abs() < 1e-12);
        assert!(gamma_from_series(&s, 0.0).is_err());
    }

    #[test]
    fn random_u_threshold_close_to_protograph() {
        let spec = CoupledEnsembleSpec::random_u(3, 6, 30).unwrap();
        let m = DeModel::from_spec(&spec).unwrap();
        let t = threshold(&m, 1e-4, DeOptions::default()).unwrap();
        assert!(t.eps_star > 0.47 && t.eps_star < 0.5, "{}", t.eps_star);
    }
}
