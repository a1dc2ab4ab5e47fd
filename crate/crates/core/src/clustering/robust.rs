use nalgebra::DMatrix;

use super::kmeans::{means, plus_plus, reseed_empty};
use super::{kmeans_with, nearest, ClusterModel, KmeansConfig};
use crate::error::{Error, Result};
use crate::linalg::{distance, rows_of};
use crate::rng::SeedStream;

/// Fresh K-means++ seedings polished in addition to the best heuristic run.
const POLISH_SEEDINGS: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct RobustKmeansConfig {
    pub k: usize,
    /// Cost charged for every unclustered point.
    pub lambda: f64,
    /// Points farther than this from every center are left unclustered.
    /// Defaults to `lambda`, which makes the assignment step exact for the
    /// penalized objective.
    pub r_star: Option<f64>,
    pub max_iters: usize,
    pub restarts: usize,
    /// After the alternating heuristic, run exchange moves (a center jumps to
    /// a data point or to the geometric median of its members) until no move
    /// lowers the objective. This escapes the trap where plain K-means spends
    /// a center on a lone outlier.
    pub polish: bool,
    /// Data points tried as exchange targets per sweep; larger inputs use a
    /// seeded subsample.
    pub polish_candidates: usize,
}

impl RobustKmeansConfig {
    pub fn new(k: usize, lambda: f64) -> Self {
        RobustKmeansConfig {
            k,
            lambda,
            r_star: None,
            max_iters: 100,
            restarts: 10,
            polish: true,
            polish_candidates: 256,
        }
    }

    pub fn radius(&self) -> f64 {
        self.r_star.unwrap_or(self.lambda)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(Error::validation("lambda", "must be positive"));
        }
        if !(self.radius() > 0.0) {
            return Err(Error::validation("r_star", "must be positive"));
        }
        if self.max_iters == 0 || self.k == 0 {
            return Err(Error::validation("robust k-means", "k and max_iters must be at least 1"));
        }
        Ok(())
    }
}

/// Penalized cost: distances of clustered points to their centers plus
/// `lambda` for each unclustered point.
pub fn gamma(points: &DMatrix<f64>, centers: &DMatrix<f64>, labels: &[usize], lambda: f64) -> f64 {
    let rows = rows_of(points);
    let cs = rows_of(centers);
    cost(&rows, &cs, labels, lambda)
}

fn cost(rows: &[Vec<f64>], centers: &[Vec<f64>], labels: &[usize], lambda: f64) -> f64 {
    rows.iter()
        .zip(labels)
        .map(|(r, &l)| if l == 0 { lambda } else { distance(r, &centers[l - 1]) })
        .sum()
}

fn threshold_assign(rows: &[Vec<f64>], centers: &[Vec<f64>], radius: f64) -> Vec<usize> {
    rows.iter()
        .map(|r| {
            let (k, d2) = nearest(r, centers);
            if d2.sqrt() < radius {
                k + 1
            } else {
                0
            }
        })
        .collect()
}

struct State {
    centers: Vec<Vec<f64>>,
    labels: Vec<usize>,
    gamma: f64,
}

fn evaluate(rows: &[Vec<f64>], centers: Vec<Vec<f64>>, radius: f64, lambda: f64) -> State {
    let labels = threshold_assign(rows, &centers, radius);
    let gamma = cost(rows, &centers, &labels, lambda);
    State { centers, labels, gamma }
}

fn geometric_median(pts: &[&Vec<f64>]) -> Vec<f64> {
    let d = pts[0].len();
    if d == 1 {
        let mut v: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        v.sort_by(f64::total_cmp);
        return vec![v[(v.len() - 1) / 2]];
    }
    let mut c: Vec<f64> = (0..d).map(|j| pts.iter().map(|p| p[j]).sum::<f64>() / pts.len() as f64).collect();
    for _ in 0..2000 {
        let mut num = vec![0.0; d];
        let mut den = 0.0;
        for p in pts {
            let dist = distance(p, &c);
            if dist < 1e-12 {
                return c;
            }
            for j in 0..d {
                num[j] += p[j] / dist;
            }
            den += 1.0 / dist;
        }
        let next: Vec<f64> = num.iter().map(|v| v / den).collect();
        let moved = distance(&next, &c);
        c = next;
        if moved < 1e-15 {
            break;
        }
    }
    c
}

/// Member sets a center is moved to the geometric median of: its current
/// members, those members without the farthest one, and those members plus
/// the nearest unclustered point. The last two catch optima where a point
/// just inside (or outside) the radius should switch sides.
fn recentering_groups<'a>(rows: &'a [Vec<f64>], state: &State, k: usize) -> [Vec<&'a Vec<f64>>; 3] {
    let center = &state.centers[k];
    let mut members: Vec<&Vec<f64>> = Vec::new();
    let mut farthest: Option<(f64, usize)> = None;
    let mut nearest_out: Option<(f64, &Vec<f64>)> = None;
    for (r, &l) in rows.iter().zip(&state.labels) {
        let dist = distance(r, center);
        if l == k + 1 {
            if farthest.map_or(true, |(d, _)| dist > d) {
                farthest = Some((dist, members.len()));
            }
            members.push(r);
        } else if l == 0 && nearest_out.map_or(true, |(d, _)| dist < d) {
            nearest_out = Some((dist, r));
        }
    }
    let mut shrunk = members.clone();
    if let Some((_, i)) = farthest {
        shrunk.remove(i);
    }
    let mut grown = members.clone();
    grown.extend(nearest_out.map(|(_, r)| r));
    [members, shrunk, grown]
}

fn polish(rows: &[Vec<f64>], candidates: &[usize], start: Vec<Vec<f64>>, radius: f64, lambda: f64) -> State {
    let mut state = evaluate(rows, start, radius, lambda);
    let improves = |cand: &State, cur: &State| cand.gamma < cur.gamma - 1e-12;
    loop {
        let mut improved = false;
        for k in 0..state.centers.len() {
            for group in recentering_groups(rows, &state, k) {
                if group.is_empty() {
                    continue;
                }
                let mut centers = state.centers.clone();
                centers[k] = geometric_median(&group);
                let cand = evaluate(rows, centers, radius, lambda);
                if improves(&cand, &state) {
                    state = cand;
                    improved = true;
                }
            }
        }
        let mut best: Option<State> = None;
        for k in 0..state.centers.len() {
            for &i in candidates {
                let mut centers = state.centers.clone();
                centers[k] = rows[i].clone();
                let cand = evaluate(rows, centers, radius, lambda);
                if improves(&cand, best.as_ref().unwrap_or(&state)) {
                    best = Some(cand);
                }
            }
        }
        if let Some(b) = best {
            state = b;
            improved = true;
        }
        if !improved {
            return state;
        }
    }
}

/// Whether `n choose k` is at most `limit`.
fn combinations_within(n: usize, k: usize, limit: usize) -> bool {
    let mut c: u128 = 1;
    for i in 0..k as u128 {
        c = c * (n as u128 - i) / (i + 1);
        if c > limit as u128 {
            return false;
        }
    }
    true
}

fn for_each_combination(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..=n - (k - cur.len()) {
            cur.push(i);
            go(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    go(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Robust K-means: alternate center means over clustered points with a
/// nearest-center assignment that leaves points beyond `r_star` unclustered,
/// starting from an unconstrained K-means solution. Across restarts the run
/// with the smallest penalized cost wins.
pub fn robust_kmeans(points: &DMatrix<f64>, config: &RobustKmeansConfig, seed: u64) -> Result<ClusterModel> {
    config.validate()?;
    let n = points.nrows();
    let k = config.k;
    if k > n {
        return Err(Error::validation("cluster count", format!("{k} exceeds {n} points")));
    }
    let rows = rows_of(points);
    let radius = config.radius();
    let lambda = config.lambda;
    let root = SeedStream::new(seed);
    let mut best: Option<State> = None;
    let consider = |s: State, best: &mut Option<State>| {
        if s.labels.iter().any(|&l| l > 0) && best.as_ref().map_or(true, |b| s.gamma < b.gamma) {
            *best = Some(s);
        }
    };
    for r in 0..config.restarts.max(1) {
        let stream = root.index(r as u64);
        let init = kmeans_with(
            points,
            k,
            &KmeansConfig {
                restarts: 1,
                max_iters: 300,
            },
            stream.child("init").seed(),
        )?;
        let mut labels = init.assignments;
        let mut centers = rows_of(&init.centers);
        let mut run_best: Option<State> = None;
        for _ in 0..config.max_iters {
            let mut counts = means(&rows, &labels, &mut centers);
            if counts.contains(&0) {
                reseed_empty(&rows, &mut labels, &mut centers, &mut counts);
            }
            let next = threshold_assign(&rows, &centers, radius);
            if next.iter().all(|&l| l == 0) {
                break;
            }
            let g = cost(&rows, &centers, &next, lambda);
            if run_best.as_ref().map_or(true, |b| g < b.gamma) {
                run_best = Some(State {
                    centers: centers.clone(),
                    labels: next.clone(),
                    gamma: g,
                });
            }
            let stable = next == labels;
            labels = next;
            if stable {
                break;
            }
        }
        if let Some(s) = run_best {
            consider(s, &mut best);
        }
    }
    if config.polish {
        let mut rng = root.child("polish").rng();
        let candidates: Vec<usize> = if n <= config.polish_candidates {
            (0..n).collect()
        } else {
            let mut c = rand::seq::index::sample(&mut rng, n, config.polish_candidates).into_vec();
            c.sort_unstable();
            c
        };
        if let Some(s) = &best {
            let start = s.centers.clone();
            consider(polish(&rows, &candidates, start, radius, lambda), &mut best);
        }
        for _ in 0..config.restarts.clamp(1, POLISH_SEEDINGS) {
            let seeds = plus_plus(&rows, k, &mut rng);
            consider(polish(&rows, &candidates, seeds, radius, lambda), &mut best);
        }
        // Small inputs: start from every set of k distinct points as well.
        if combinations_within(n, k, config.polish_candidates) {
            for_each_combination(n, k, &mut |idx| {
                let start = idx.iter().map(|&i| rows[i].clone()).collect();
                consider(polish(&rows, &candidates, start, radius, lambda), &mut best);
            });
        }
    }
    let state = best.ok_or_else(|| {
        Error::DegenerateClustering(format!("every point is farther than r_star = {radius} from all centers"))
    })?;
    let mut model = ClusterModel::from_labels(points, k, state.labels, state.gamma);
    for (kk, c) in state.centers.iter().enumerate() {
        for (j, v) in c.iter().enumerate() {
            model.centers[(kk, j)] = *v;
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(rows: &[Vec<f64>], k: usize, lambda: f64) -> f64 {
        let n = rows.len();
        let mut best = f64::INFINITY;
        let mut idx = vec![0usize; k];
        loop {
            let centers: Vec<Vec<f64>> = idx.iter().map(|&i| rows[i].clone()).collect();
            let g: f64 = rows
                .iter()
                .map(|r| centers.iter().map(|c| distance(r, c)).fold(lambda, f64::min))
                .sum();
            best = best.min(g);
            let mut pos = 0;
            loop {
                if pos == k {
                    return best;
                }
                idx[pos] += 1;
                if idx[pos] < n {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn far_point_is_left_unclustered() {
        let pts = DMatrix::from_row_slice(
            7,
            2,
            &[0.0, 0.0, 0.1, 0.0, 0.0, 0.1, 5.0, 5.0, 5.1, 5.0, 5.0, 5.1, 100.0, 100.0],
        );
        let cfg = RobustKmeansConfig {
            r_star: Some(1.0),
            ..RobustKmeansConfig::new(2, 0.2)
        };
        let m = robust_kmeans(&pts, &cfg, 3).unwrap();
        assert_eq!(m.assignments[6], 0);
        assert!(m.assignments[..6].iter().all(|&l| l > 0));
        let within = gamma(&pts, &m.centers, &m.assignments, 0.2) - 0.2;
        assert!((m.objective - (within + 0.2)).abs() < 1e-12);
        assert!(within < 6.0 * 0.1);
    }

    #[test]
    fn infinite_radius_is_a_kmeans_fixed_point() {
        let pts = DMatrix::from_row_slice(6, 1, &[0.0, 0.2, 0.4, 3.0, 3.3, 9.0]);
        let cfg = RobustKmeansConfig {
            r_star: Some(f64::INFINITY),
            polish: false,
            ..RobustKmeansConfig::new(2, 0.2)
        };
        let m = robust_kmeans(&pts, &cfg, 1).unwrap();
        assert!(m.assignments.iter().all(|&l| l > 0));
        let rows = rows_of(&pts);
        let centers = rows_of(&m.centers);
        for (r, &l) in rows.iter().zip(&m.assignments) {
            assert_eq!(nearest(r, &centers).0 + 1, l);
        }
        let again = ClusterModel::from_labels(&pts, 2, m.assignments.clone(), 0.0);
        assert!((again.centers - &m.centers).abs().max() < 1e-12);
    }

    #[test]
    fn polished_runs_match_brute_force_in_one_dimension() {
        use rand::Rng as _;
        let mut rng = SeedStream::new(99).rng();
        for case in 0..40 {
            let n = rng.gen_range(2..=10);
            let k = rng.gen_range(1..=2.min(n));
            let lambda = rng.gen_range(0.05..1.0);
            let pts = DMatrix::from_fn(n, 1, |_, _| rng.gen::<f64>() * 3.0);
            let cfg = RobustKmeansConfig {
                polish: true,
                restarts: 20,
                ..RobustKmeansConfig::new(k, lambda)
            };
            let m = robust_kmeans(&pts, &cfg, case).unwrap();
            let exact = brute_force(&rows_of(&pts), k, lambda);
            assert!((m.objective - exact).abs() < 1e-9, "case {case}: {} vs {exact}", m.objective);
        }
    }

    #[test]
    fn all_unclustered_is_an_error() {
        let pts = DMatrix::from_row_slice(2, 1, &[0.0, 10.0]);
        let cfg = RobustKmeansConfig {
            r_star: Some(1e-9),
            polish: false,
            ..RobustKmeansConfig::new(1, 0.2)
        };
        assert!(matches!(robust_kmeans(&pts, &cfg, 0), Err(Error::DegenerateClustering(_))));
    }

    #[test]
    fn invalid_configs() {
        let pts = DMatrix::zeros(3, 1);
        assert!(robust_kmeans(&pts, &RobustKmeansConfig::new(1, 0.0), 0).is_err());
        let cfg = RobustKmeansConfig {
            r_star: Some(-1.0),
            ..RobustKmeansConfig::new(1, 0.2)
        };
        assert!(robust_kmeans(&pts, &cfg, 0).is_err());
    }
}
