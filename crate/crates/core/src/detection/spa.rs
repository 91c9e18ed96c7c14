//! Sum-product detection on the factor graph of a sparse 2D circular convolution.
//!
//! Each received cell `y[k, l]` is a factor node connected to the data
//! symbols `x[k - k_t, l - l_t]` reached by the `L` retained taps. Known
//! cells (pilot, guard) are subtracted from the observation and are not
//! variables. Discarded taps are folded into the Gaussian noise variance.
//! Messages are kept in the log domain; the sum step enumerates all `Q^d`
//! neighbour configurations of a factor exactly.

use num_complex::Complex64;

use super::DetectionReport;
use crate::channel::TruncatedChannel;
use crate::error::{Error, Result};
use crate::grid::{Constellation, DdFrame};

/// Message-passing settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaConfig {
    /// Maximum number of flooding iterations.
    pub iterations: usize,
    /// Weight of the previous variable-to-factor message, in `[0, 1)`.
    pub damping: f64,
    /// Stop once the largest marginal change drops below this.
    pub tolerance: f64,
    /// Largest factor table size `Q^L` allowed.
    pub budget: u128,
}

impl Default for SpaConfig {
    fn default() -> Self {
        Self {
            iterations: 20,
            damping: 0.5,
            tolerance: 1e-4,
            budget: 1 << 16,
        }
    }
}

/// SPA output.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaReport {
    pub report: DetectionReport,
    /// A-posteriori symbol probabilities for each data cell, in `data_cells` order.
    pub marginals: Vec<Vec<f64>>,
    /// Iterations actually run.
    pub iterations: usize,
    /// Largest deviation of any marginal sum from 1, over all iterations.
    pub max_normalization_error: f64,
}

struct Factor {
    obs: Complex64,
    vars: Vec<usize>,
    coeffs: Vec<Complex64>,
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

fn normalize_log(v: &mut [f64]) {
    let z = log_sum_exp(v);
    for x in v.iter_mut() {
        *x -= z;
    }
}

/// Sum-product detector.
///
/// `known` holds the values of every non-data cell (pilot and guard);
/// entries at data cells are ignored. `noise_var` is the DD-domain noise
/// power per cell; the truncation residual energy is added to it.
pub fn spa_detect(
    y: &DdFrame,
    channel: &TruncatedChannel,
    known: &DdFrame,
    data_cells: &[usize],
    noise_var: f64,
    c: &Constellation,
    cfg: &SpaConfig,
) -> Result<SpaReport> {
    let (n, m) = (y.rows(), y.cols());
    if channel.n != n || channel.m != m || !known.same_shape(y) {
        return Err(Error::shape(format!("{n}x{m}"), format!("{}x{}", channel.n, channel.m)));
    }
    let l = channel.taps.len();
    if l < 1 {
        return Err(Error::invalid("SPA needs at least one tap"));
    }
    let q = c.size();
    let required = (q as u128).checked_pow(l as u32).unwrap_or(u128::MAX);
    if required > cfg.budget {
        return Err(Error::SpaBudget {
            required,
            budget: cfg.budget,
        });
    }
    if !(0.0..1.0).contains(&cfg.damping) {
        return Err(Error::invalid(format!("damping must lie in [0, 1), got {}", cfg.damping)));
    }
    let sigma2 = noise_var + channel.residual_energy;
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::invalid("SPA needs a positive noise variance"));
    }

    let mn = n * m;
    let mut var_of_cell = vec![usize::MAX; mn];
    for (v, &cell) in data_cells.iter().enumerate() {
        if cell >= mn {
            return Err(Error::invalid(format!("data cell {cell} outside the frame")));
        }
        var_of_cell[cell] = v;
    }

    // Build factors; subtract the contribution of known cells.
    let mut factors: Vec<Factor> = Vec::with_capacity(mn);
    for k in 0..n {
        for ll in 0..m {
            let mut obs = y[(k, ll)];
            let mut vars = Vec::new();
            let mut coeffs = Vec::new();
            for t in &channel.taps {
                let kp = (k + n - t.k % n) % n;
                let lp = (ll + m - t.l % m) % m;
                let cell = kp * m + lp;
                let v = var_of_cell[cell];
                if v == usize::MAX {
                    obs -= t.value * known.as_slice()[cell];
                } else if let Some(pos) = vars.iter().position(|&x| x == v) {
                    coeffs[pos] += t.value;
                } else {
                    vars.push(v);
                    coeffs.push(t.value);
                }
            }
            if !vars.is_empty() {
                factors.push(Factor { obs, vars, coeffs });
            }
        }
    }

    let nv = data_cells.len();
    let points = c.points();
    let log_prior = -(q as f64).ln();

    // Edge storage: per factor, per neighbour, a length-Q log message.
    let mut v2f: Vec<Vec<Vec<f64>>> = factors.iter().map(|f| vec![vec![log_prior; q]; f.vars.len()]).collect();
    let mut f2v: Vec<Vec<Vec<f64>>> = factors.iter().map(|f| vec![vec![log_prior; q]; f.vars.len()]).collect();
    let mut edges_of_var: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
    for (fi, f) in factors.iter().enumerate() {
        for (pos, &v) in f.vars.iter().enumerate() {
            edges_of_var[v].push((fi, pos));
        }
    }

    let mut marginals = vec![vec![1.0 / q as f64; q]; nv];
    let mut max_norm_err: f64 = 0.0;
    let mut iterations = 0;
    let mut scratch_total: Vec<f64> = Vec::new();
    let mut scratch_sel: Vec<f64> = Vec::new();

    for _ in 0..cfg.iterations {
        iterations += 1;

        // Sum step: factor -> variable.
        for (fi, f) in factors.iter().enumerate() {
            let d = f.vars.len();
            let configs = q.pow(d as u32);
            scratch_total.clear();
            let mut digits = vec![0usize; d];
            for _ in 0..configs {
                let mut s = f.obs;
                let mut lm = 0.0;
                for j in 0..d {
                    s -= f.coeffs[j] * points[digits[j]];
                    lm += v2f[fi][j][digits[j]];
                }
                scratch_total.push(-s.norm_sqr() / sigma2 + lm);
                for digit in digits.iter_mut() {
                    *digit += 1;
                    if *digit < q {
                        break;
                    }
                    *digit = 0;
                }
            }
            for j in 0..d {
                let mut msg = vec![0.0; q];
                for (a, slot) in msg.iter_mut().enumerate() {
                    scratch_sel.clear();
                    let stride = q.pow(j as u32);
                    for (idx, &t) in scratch_total.iter().enumerate() {
                        if (idx / stride) % q == a {
                            scratch_sel.push(t);
                        }
                    }
                    *slot = log_sum_exp(&scratch_sel) - v2f[fi][j][a];
                }
                normalize_log(&mut msg);
                f2v[fi][j] = msg;
            }
        }

        // Product step: marginals and variable -> factor messages.
        let mut change: f64 = 0.0;
        for v in 0..nv {
            let mut belief = vec![log_prior; q];
            for &(fi, pos) in &edges_of_var[v] {
                for a in 0..q {
                    belief[a] += f2v[fi][pos][a];
                }
            }
            let mut b = belief.clone();
            normalize_log(&mut b);
            let probs: Vec<f64> = b.iter().map(|x| x.exp()).collect();
            let sum: f64 = probs.iter().sum();
            max_norm_err = max_norm_err.max((sum - 1.0).abs());
            for a in 0..q {
                change = change.max((probs[a] - marginals[v][a]).abs());
            }
            marginals[v] = probs;

            for &(fi, pos) in &edges_of_var[v] {
                let mut msg: Vec<f64> = (0..q).map(|a| belief[a] - f2v[fi][pos][a]).collect();
                normalize_log(&mut msg);
                let old = &v2f[fi][pos];
                let mut damped: Vec<f64> = (0..q)
                    .map(|a| {
                        let p = (1.0 - cfg.damping) * msg[a].exp() + cfg.damping * old[a].exp();
                        p.max(1e-300).ln()
                    })
                    .collect();
                normalize_log(&mut damped);
                v2f[fi][pos] = damped;
            }
        }
        if change < cfg.tolerance {
            break;
        }
    }

    let mut soft = known.clone();
    let mut hard: Vec<usize> = known.as_slice().iter().map(|&v| c.nearest(v)).collect();
    for (v, &cell) in data_cells.iter().enumerate() {
        let p = &marginals[v];
        let best = (0..q).fold(0, |b, a| if p[a] > p[b] { a } else { b });
        hard[cell] = best;
        soft.as_mut_slice()[cell] = (0..q).map(|a| points[a] * p[a]).sum();
    }
    Ok(SpaReport {
        report: DetectionReport { soft, hard },
        marginals,
        iterations,
        max_normalization_error: max_norm_err,
    })
}
