//! Ornstein–Uhlenbeck model of the critical phase and the block-error
//! scaling law.
//!
//! In the flipped frame the process starts at `X(0) = 0`, reverts to 0 at
//! rate `Theta` with stationary variance `delta / M`, and decoding fails when
//! it first reaches `s = gamma (eps* - eps)`. The mean first-passage time is
//!
//! `mu0 = sqrt(2 pi) / Theta * int_0^z Phi(t) exp(t^2 / 2) dt`,
//! `z = gamma sqrt(M) (eps* - eps) / sqrt(delta)`,
//!
//! and `P_b = 1 - exp(-tau_eff / mu0)`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::density_evolution::{run_de, DeModel, DeOptions};
use crate::seed;
use crate::{Error, Result};

/// Upper integration limits beyond this return an infinite mean FPT.
pub const Z_OVERFLOW: f64 = 40.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OUParameters {
    pub gamma: f64,
    pub delta: f64,
    #[serde(rename = "Theta")]
    pub theta: f64,
    pub epsilon_star: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub epsilon: f64,
}

impl OUParameters {
    pub fn new(gamma: f64, delta: f64, theta: f64, epsilon_star: f64, m: f64, epsilon: f64) -> Result<Self> {
        let p = OUParameters {
            gamma,
            delta,
            theta,
            epsilon_star,
            m,
            epsilon,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters from the scale-free ratio `alpha = gamma / sqrt(delta)`.
    /// Only `alpha` and `Theta` enter `mu0`; `gamma` sets the level of
    /// simulated paths.
    pub fn from_alpha(alpha: f64, gamma: f64, theta: f64, epsilon_star: f64, m: f64, epsilon: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter("alpha must be positive".into()));
        }
        Self::new(gamma, (gamma / alpha).powi(2), theta, epsilon_star, m, epsilon)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.into()));
        if !(self.theta > 0.0) {
            return bad("Theta must be positive");
        }
        if !(self.delta > 0.0) {
            return bad("delta must be positive");
        }
        if !(self.gamma > 0.0) {
            return bad("gamma must be positive");
        }
        if !(self.m >= 1.0) {
            return bad("M must be at least 1");
        }
        if !(self.epsilon <= self.epsilon_star) {
            return bad("epsilon must not exceed eps*");
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.gamma / self.delta.sqrt()
    }

    /// Mean level `x0 = gamma (eps* - eps)`, also the boundary `s`.
    pub fn x0(&self) -> f64 {
        self.gamma * (self.epsilon_star - self.epsilon)
    }

    pub fn boundary(&self) -> f64 {
        self.x0()
    }

    pub fn variance(&self) -> f64 {
        self.delta / self.m
    }

    pub fn b(&self) -> f64 {
        self.theta * self.delta / self.m
    }

    pub fn sigma(&self) -> f64 {
        (2.0 * self.b()).sqrt()
    }

    /// `s / sqrt(b / Theta)`, the upper integration limit.
    pub fn z(&self) -> f64 {
        self.boundary() / self.variance().sqrt()
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.gamma, self.delta, self.theta, self.epsilon_star, self.m, epsilon)
    }
}

/// Standard normal CDF.
pub fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One 15-point Kronrod rule with the embedded 7-point Gauss estimate.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod quadrature to relative error `rel_tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    let mut parts = vec![(a, b, gk15(&f, a, b))];
    for _ in 0..2000 {
        let total: f64 = parts.iter().map(|p| p.2 .0).sum();
        let err: f64 = parts.iter().map(|p| p.2 .1).sum();
        if err <= rel_tol * total.abs() || !total.is_finite() {
            break;
        }
        let (i, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .unwrap();
        let (lo, hi, _) = parts.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        parts.push((lo, mid, gk15(&f, lo, mid)));
        parts.push((mid, hi, gk15(&f, mid, hi)));
    }
    parts.iter().map(|p| p.2 .0).sum()
}

/// Mean first-passage time; `+inf` once the upper limit exceeds
/// [`Z_OVERFLOW`].
pub fn mean_fpt(params: &OUParameters) -> Result<f64> {
    params.validate()?;
    Ok(mean_fpt_z(params.z(), params.theta))
}

/// Mean first-passage time for upper limit `z` and reversion rate `theta`.
pub fn mean_fpt_z(z: f64, theta: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    if z > Z_OVERFLOW {
        return f64::INFINITY;
    }
    let integral = integrate(|t| phi(t) * (0.5 * t * t).exp(), 0.0, z, 1e-10);
    (2.0 * std::f64::consts::PI).sqrt() / theta * integral
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub dt: f64,
    /// Paths still below the boundary at this time report `+inf`.
    pub max_time: f64,
    /// Count crossings between grid points with the Brownian-bridge
    /// probability `exp(-2 (s - x0)(s - x1) / (sigma^2 dt))`.
    pub bridge: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            dt: 1e-3,
            max_time: f64::INFINITY,
            bridge: true,
        }
    }
}

fn one_path(params: &OUParameters, opts: &SimOptions, path_seed: u64) -> f64 {
    let s = params.boundary();
    let sigma = params.sigma();
    let (theta, dt) = (params.theta, opts.dt);
    let sd = sigma * dt.sqrt();
    let bridge_scale = 2.0 / (sigma * sigma * dt);
    let mut rng = seed::rng(path_seed);
    let mut x = 0.0f64;
    let mut t = 0.0;
    while t < opts.max_time {
        let z: f64 = rng.sample(StandardNormal);
        let next = x - theta * x * dt + sd * z;
        if next >= s {
            return t + dt;
        }
        if opts.bridge {
            let p = (-(s - x) * (s - next) * bridge_scale).exp();
            if rng.random::<f64>() < p {
                return t + 0.5 * dt;
            }
        }
        x = next;
        t += dt;
    }
    f64::INFINITY
}

/// Euler–Maruyama first-passage times of `dX = -Theta X dt + sigma dW` from
/// `X(0) = 0` to the boundary `s`. Path `i` draws from its own seed.
pub fn ou_simulate(params: &OUParameters, opts: SimOptions, n_paths: usize, base_seed: u64) -> Result<Vec<f64>> {
    params.validate()?;
    if !(opts.dt > 0.0) || n_paths == 0 {
        return Err(Error::InvalidParameter("dt must be positive and n_paths at least 1".into()));
    }
    if params.boundary() <= 0.0 {
        return Ok(vec![0.0; n_paths]);
    }
    if params.sigma() == 0.0 {
        return Ok(vec![f64::INFINITY; n_paths]);
    }
    Ok((0..n_paths as u64)
        .into_par_iter()
        .map(|i| one_path(params, &opts, seed::derive(base_seed, &[i])))
        .collect())
}

/// Exact AR(1) sampling of the stationary process on a grid of step `dtau`,
/// at mean level `x0` (not the flipped frame).
pub fn ou_stationary_series(params: &OUParameters, dtau: f64, steps: usize, rng: &mut impl Rng) -> Vec<f64> {
    let rho = (-params.theta * dtau).exp();
    let sd = params.variance().sqrt();
    let innov = sd * (1.0 - rho * rho).sqrt();
    let mut dev = sd * rng.sample::<f64, _>(StandardNormal);
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        out.push(params.x0() + dev);
        dev = rho * dev + innov * rng.sample::<f64, _>(StandardNormal);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub n: usize,
    /// Samples that never crossed within the simulated horizon.
    pub censored: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub mu0: f64,
}

/// Asymptotic Kolmogorov survival function with the Stephens correction.
fn kolmogorov_p(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Kolmogorov–Smirnov distance of the samples from `Exp(1/mu0)`.
pub fn fpt_pdf_check(samples: &[f64], mu0: f64) -> Result<KsReport> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no samples".into()));
    }
    if !(mu0 > 0.0 && mu0.is_finite()) {
        return Err(Error::InvalidParameter(format!("mu0 = {mu0} is not a positive finite mean")));
    }
    let mut xs: Vec<f64> = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    let nf = n as f64;
    let mut d: f64 = 0.0;
    let mut censored = 0;
    for (i, &x) in xs.iter().enumerate() {
        if !x.is_finite() {
            censored += 1;
            continue;
        }
        let cdf = -(-x / mu0).exp_m1();
        d = d.max((i + 1) as f64 / nf - cdf).max(cdf - i as f64 / nf);
    }
    if censored > 0 {
        // the ECDF stays at (n - censored)/n beyond the largest finite sample
        d = d.max(censored as f64 / nf);
    }
    Ok(KsReport {
        n,
        censored,
        statistic: d,
        p_value: kolmogorov_p(d, n),
        mu0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauEff {
    /// DE iterations to success.
    pub t_predicted: usize,
    pub tau_predicted: f64,
    pub tau_corr: f64,
    pub tau_eff: f64,
}

pub fn tau_eff(model: &DeModel, epsilon: f64, epsilon_star: f64, tau_corr: f64) -> Result<TauEff> {
    if epsilon >= epsilon_star {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} is not below eps* {epsilon_star}")));
    }
    let traj = run_de(model, epsilon, DeOptions::default())?;
    if !traj.converged {
        return Err(Error::DidNotConverge { epsilon });
    }
    let tau_predicted = traj.iterations as f64 * (epsilon_star - epsilon);
    Ok(TauEff {
        t_predicted: traj.iterations,
        tau_predicted,
        tau_corr,
        tau_eff: tau_predicted - tau_corr,
    })
}

/// `P_b = 1 - exp(-tau_eff / mu0)`.
pub fn predict_block_error(mu0: f64, tau_eff: f64) -> Result<f64> {
    if tau_eff < 0.0 {
        return Err(Error::InvalidParameter(format!("tau_eff = {tau_eff} is negative")));
    }
    if mu0.is_infinite() || tau_eff == 0.0 {
        return Ok(0.0);
    }
    if mu0 <= 0.0 {
        return Ok(1.0);
    }
    Ok(-(-tau_eff / mu0).exp_m1())
}

/// `tau_corr` that makes the law reproduce one simulated frame-error rate.
/// Using it at other operating points is an extrapolation.
pub fn calibrate_tau_corr(params: &OUParameters, tau_predicted: f64, simulated_fer: f64) -> Result<f64> {
    if !(simulated_fer > 0.0 && simulated_fer < 1.0) {
        return Err(Error::InvalidParameter("simulated FER must lie strictly between 0 and 1".into()));
    }
    let mu0 = mean_fpt(params)?;
    if !mu0.is_finite() {
        return Err(Error::Numerical("mean first-passage time overflows".into()));
    }
    Ok(tau_predicted + mu0 * (-simulated_fer).ln_1p())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub ensemble: String,
    #[serde(rename = "M")]
    pub m: f64,
    pub eps: f64,
    pub eps_star: f64,
    pub gamma: f64,
    pub delta: f64,
    #[serde(rename = "Theta")]
    pub theta: f64,
    pub tau_eff: f64,
    pub tau_corr: f64,
    pub t_predicted: usize,
    pub mu0: f64,
    pub p_block: f64,
}

/// Full pipeline at one operating point: DE time, `mu0`, `P_b`.
pub fn predict(model: &DeModel, params: &OUParameters, tau_corr: f64) -> Result<Prediction> {
    let t = tau_eff(model, params.epsilon, params.epsilon_star, tau_corr)?;
    let mu0 = mean_fpt(params)?;
    Ok(Prediction {
        ensemble: model.label().to_string(),
        m: params.m,
        eps: params.epsilon,
        eps_star: params.epsilon_star,
        gamma: params.gamma,
        delta: params.delta,
        theta: params.theta,
        tau_eff: t.tau_eff,
        tau_corr,
        t_predicted: t.t_predicted,
        mu0,
        p_block: predict_block_error(mu0, t.tau_eff.max(0.0))?,
    })
}

pub fn predict_sweep(model: &DeModel, params: &OUParameters, tau_corr: f64, epsilons: &[f64]) -> Result<Vec<Prediction>> {
    epsilons
        .iter()
        .map(|&e| predict(model, &params.with_epsilon(e)?, tau_corr))
        .collect()
}

pub fn sweep_csv(rows: &[Prediction]) -> String {
    let mut out = String::from("eps,M,tau_eff,mu0,p_block\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{:e},{:e}\n", r.eps, r.m, r.tau_eff, r.mu0, r.p_block));
    }
    out
}
