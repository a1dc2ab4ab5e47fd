use std::ops::RangeInclusive;

use nalgebra::{Cholesky, DMatrix};

use super::kmeans::{lloyd, plus_plus};
use super::ClusterModel;
use crate::error::{Error, Result};
use crate::linalg::rows_of;
use crate::rng::SeedStream;

#[derive(Debug, Clone, PartialEq)]
pub struct GmmConfig {
    pub k_range: RangeInclusive<usize>,
    pub restarts: usize,
    pub max_iters: usize,
    /// Relative log-likelihood change that counts as converged.
    pub tol: f64,
}

impl Default for GmmConfig {
    fn default() -> Self {
        GmmConfig {
            k_range: 1..=9,
            restarts: 5,
            max_iters: 500,
            tol: 1e-5,
        }
    }
}

/// One mixture fit at a fixed `K`.
#[derive(Debug, Clone)]
pub struct GmmFit {
    pub model: ClusterModel,
    pub loglik: f64,
    pub bic: f64,
    /// Penalized objective after every EM iteration; never decreases.
    pub trace: Vec<f64>,
}

struct Component {
    weight: f64,
    mean: Vec<f64>,
    cov: DMatrix<f64>,
}

/// Number of free parameters of a full-covariance mixture.
pub(crate) fn parameter_count(k: usize, d: usize) -> usize {
    k * d + k * d * (d + 1) / 2 + k - 1
}

/// Responsibilities (row-major `n x K`) and the log-likelihood. `None` when
/// a covariance is not positive definite. `x` is row-major `n x d`.
fn e_step(x: &[f64], d: usize, comps: &[Component]) -> Option<(Vec<f64>, f64)> {
    let k = comps.len();
    let log2pi = (2.0 * std::f64::consts::PI).ln();
    // Inverse Cholesky factors turn every quadratic form into a triangular
    // matrix-vector product.
    let mut factors = Vec::with_capacity(k);
    for c in comps {
        let chol = Cholesky::new(c.cov.clone())?;
        let l = chol.l();
        let logdet = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let linv = l.try_inverse()?;
        let flat: Vec<f64> = (0..d * d).map(|i| linv[(i / d, i % d)]).collect();
        factors.push((flat, c.weight.ln() - 0.5 * (logdet + d as f64 * log2pi)));
    }
    let n = x.len() / d;
    let mut resp = vec![0.0; n * k];
    let mut diff = vec![0.0; d];
    let mut loglik = 0.0;
    for i in 0..n {
        let xi = &x[i * d..(i + 1) * d];
        let row = &mut resp[i * k..(i + 1) * k];
        for (kk, (linv, constant)) in factors.iter().enumerate() {
            for a in 0..d {
                diff[a] = xi[a] - comps[kk].mean[a];
            }
            let mut q = 0.0;
            for a in 0..d {
                let z: f64 = (0..=a).map(|b| linv[a * d + b] * diff[b]).sum();
                q += z * z;
            }
            row[kk] = constant - 0.5 * q;
        }
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = row.iter().map(|v| (v - m).exp()).sum();
        let lse = m + s.ln();
        loglik += lse;
        for v in row.iter_mut() {
            *v = (*v - lse).exp();
        }
    }
    loglik.is_finite().then_some((resp, loglik))
}

/// M-step maximizing the expected log-likelihood minus
/// `penalty / 2 * sum_k tr(cov_k^-1)`; the covariance update becomes
/// `(S_k + penalty I) / N_k`.
fn m_step(x: &[f64], d: usize, resp: &[f64], k: usize, penalty: f64) -> Option<Vec<Component>> {
    let n = x.len() / d;
    let mut comps = Vec::with_capacity(k);
    for kk in 0..k {
        let nk: f64 = (0..n).map(|i| resp[i * k + kk]).sum();
        if !(nk > 1e-10) {
            return None;
        }
        let mut mean = vec![0.0; d];
        for i in 0..n {
            let r = resp[i * k + kk];
            for a in 0..d {
                mean[a] += r * x[i * d + a];
            }
        }
        mean.iter_mut().for_each(|v| *v /= nk);
        let mut acc = vec![0.0; d * d];
        let mut diff = vec![0.0; d];
        for i in 0..n {
            let r = resp[i * k + kk];
            for a in 0..d {
                diff[a] = x[i * d + a] - mean[a];
            }
            for a in 0..d {
                let ra = r * diff[a];
                for b in 0..=a {
                    acc[a * d + b] += ra * diff[b];
                }
            }
        }
        let cov = DMatrix::from_fn(d, d, |a, b| {
            let v = if a >= b { acc[a * d + b] } else { acc[b * d + a] };
            (v + if a == b { penalty } else { 0.0 }) / nk
        });
        comps.push(Component {
            weight: nk / n as f64,
            mean,
            cov,
        });
    }
    Some(comps)
}

fn penalty_term(comps: &[Component], penalty: f64) -> f64 {
    comps
        .iter()
        .map(|c| {
            c.cov
                .clone()
                .try_inverse()
                .map_or(f64::INFINITY, |inv| inv.trace())
        })
        .sum::<f64>()
        * penalty
        / 2.0
}

/// Ridge strength shared by every fit on the same data.
fn penalty_for(x: &[f64], d: usize) -> f64 {
    let n = (x.len() / d) as f64;
    let mean: Vec<f64> = (0..d).map(|a| x.iter().skip(a).step_by(d).sum::<f64>() / n).collect();
    let trace: f64 = x.iter().enumerate().map(|(i, v)| (v - mean[i % d]).powi(2)).sum::<f64>() / n;
    n * (1e-6 * trace / d as f64).max(1e-12)
}

/// Fits a `K`-component full-covariance mixture by EM from several
/// k-means-seeded starts, keeping the best penalized likelihood.
pub fn fit_gmm(points: &DMatrix<f64>, k: usize, config: &GmmConfig, seed: u64) -> Result<GmmFit> {
    let n = points.nrows();
    let d = points.ncols();
    if n == 0 || d == 0 {
        return Err(Error::validation("points", "empty matrix"));
    }
    if k == 0 || k > n {
        return Err(Error::validation("component count", format!("{k} not in 1..={n}")));
    }
    let rows = rows_of(points);
    let x: Vec<f64> = rows.iter().flatten().copied().collect();
    let penalty = penalty_for(&x, d);
    let root = SeedStream::new(seed);
    let mut best: Option<(f64, GmmFit)> = None;
    for r in 0..config.restarts.max(1) {
        let init = plus_plus(&rows, k, &mut root.index(r as u64).rng());
        let (labels, _, _) = lloyd(&rows, init, 20);
        let hard: Vec<f64> = labels
            .iter()
            .flat_map(|&l| (0..k).map(move |kk| if kk + 1 == l { 1.0 } else { 0.0 }))
            .collect();
        let Some(mut comps) = m_step(&x, d, &hard, k, penalty) else {
            continue;
        };
        let mut trace = Vec::new();
        let mut last: Option<(Vec<f64>, f64)> = None;
        let mut degenerate = false;
        for _ in 0..config.max_iters.max(1) {
            let Some((resp, loglik)) = e_step(&x, d, &comps) else {
                degenerate = true;
                break;
            };
            let objective = loglik - penalty_term(&comps, penalty);
            if let Some(&prev) = trace.last() {
                let tol = 1e-8 * f64::max(1.0, f64::abs(prev));
                debug_assert!(objective >= prev - tol, "EM objective fell from {prev} to {objective}");
                trace.push(objective);
                if (objective - prev).abs() <= config.tol * f64::abs(prev) {
                    last = Some((resp, loglik));
                    break;
                }
            } else {
                trace.push(objective);
            }
            match m_step(&x, d, &resp, k, penalty) {
                Some(next) => comps = next,
                None => {
                    degenerate = true;
                    break;
                }
            }
            last = Some((resp, loglik));
        }
        if degenerate {
            log::debug!("gmm restart {r} with k = {k} degenerated");
            continue;
        }
        // Responsibilities and likelihood must describe the final parameters.
        let Some((resp, loglik)) = e_step(&x, d, &comps).or(last) else {
            continue;
        };
        let objective = loglik - penalty_term(&comps, penalty);
        let labels: Vec<usize> = resp
            .chunks(k)
            .map(|row| {
                let mut arg = 0;
                for kk in 1..k {
                    if row[kk] > row[arg] {
                        arg = kk;
                    }
                }
                arg + 1
            })
            .collect();
        let bic = 2.0 * loglik - parameter_count(k, d) as f64 * (n as f64).ln();
        let model = ClusterModel {
            centers: DMatrix::from_fn(k, d, |kk, c| comps[kk].mean[c]),
            covariances: comps.iter().map(|c| c.cov.clone()).collect(),
            weights: comps.iter().map(|c| c.weight).collect(),
            assignments: labels,
            objective: bic,
        };
        let fit = GmmFit {
            model,
            loglik,
            bic,
            trace,
        };
        if best.as_ref().map_or(true, |(o, _)| objective > *o) {
            best = Some((objective, fit));
        }
    }
    best.map(|(_, f)| f)
        .ok_or_else(|| Error::Convergence(format!("every EM restart degenerated for K = {k}")))
}

/// Fits mixtures for every `K` in the configured range and keeps the one with
/// the largest BIC (`2 loglik - params ln n`); ties go to the smaller `K`.
pub fn gmm_bic_with(points: &DMatrix<f64>, config: &GmmConfig, seed: u64) -> Result<ClusterModel> {
    let n = points.nrows();
    let d = points.ncols();
    let (lo, hi) = (*config.k_range.start(), *config.k_range.end());
    if lo == 0 || lo > hi {
        return Err(Error::validation("cluster range", format!("{lo}..={hi}")));
    }
    let cap = n.saturating_sub(1) / (d + 1);
    if cap < lo {
        return Err(Error::validation(
            "cluster range",
            format!("{n} points in {d} dimensions cannot support {lo} components"),
        ));
    }
    let hi = hi.min(cap);
    let root = SeedStream::new(seed);
    let mut best: Option<GmmFit> = None;
    let mut last_err = None;
    for k in lo..=hi {
        match fit_gmm(points, k, config, root.index(k as u64).seed()) {
            Ok(fit) => {
                log::trace!("k = {k}: loglik {:.3}, bic {:.3}", fit.loglik, fit.bic);
                if best.as_ref().map_or(true, |b| fit.bic > b.bic) {
                    best = Some(fit);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some(fit) => Ok(fit.model),
        None => Err(last_err.unwrap_or_else(|| Error::Convergence("no component count fitted".into()))),
    }
}

/// BIC-selected mixture over `k_range` with default restarts and tolerances.
pub fn gmm_bic(points: &DMatrix<f64>, k_range: RangeInclusive<usize>, seed: u64) -> Result<ClusterModel> {
    gmm_bic_with(
        points,
        &GmmConfig {
            k_range,
            ..GmmConfig::default()
        },
        seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;
    use rand_distr::StandardNormal;

    fn two_clouds(seed: u64) -> (DMatrix<f64>, [f64; 2], [f64; 2]) {
        let mut rng = SeedStream::new(seed).rng();
        let n = 200;
        let mut m = DMatrix::zeros(n, 2);
        for i in 0..n {
            let shift = if i < n / 2 { 0.0 } else { 10.0 };
            m[(i, 0)] = shift + rng.sample::<f64, _>(StandardNormal);
            m[(i, 1)] = rng.sample::<f64, _>(StandardNormal);
        }
        let mean = |lo: usize, hi: usize, c: usize| (lo..hi).map(|i| m[(i, c)]).sum::<f64>() / (hi - lo) as f64;
        let a = [mean(0, n / 2, 0), mean(0, n / 2, 1)];
        let b = [mean(n / 2, n, 0), mean(n / 2, n, 1)];
        (m, a, b)
    }

    #[test]
    fn separated_clouds_choose_two() {
        let (pts, a, b) = two_clouds(1);
        let m = gmm_bic(&pts, 1..=5, 7).unwrap();
        assert_eq!(m.k(), 2);
        m.validate().unwrap();
        let mut centers = [m.center(1), m.center(2)];
        centers.sort_by(|x, y| x[0].total_cmp(&y[0]));
        for (c, t) in centers.iter().zip([a, b]) {
            assert!((c[0] - t[0]).abs() < 0.1 && (c[1] - t[1]).abs() < 0.1);
        }
    }

    #[test]
    fn identical_points_give_one_component() {
        let pts = DMatrix::from_element(50, 2, 0.3);
        let m = gmm_bic(&pts, 1..=4, 0).unwrap();
        assert_eq!(m.k(), 1);
        assert!(m.assignments.iter().all(|&l| l == 1));
    }

    #[test]
    fn em_trace_is_monotone() {
        let (pts, _, _) = two_clouds(5);
        let fit = fit_gmm(&pts, 3, &GmmConfig::default(), 2).unwrap();
        for w in fit.trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-8 * w[0].abs().max(1.0));
        }
    }

    #[test]
    fn parameter_count_matches_formula() {
        assert_eq!(parameter_count(2, 2), 4 + 6 + 1);
        assert_eq!(parameter_count(1, 3), 3 + 6);
    }
}
