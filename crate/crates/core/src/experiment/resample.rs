//! Re-sampling protocol for a single observed network: the observed graph is
//! embedded, diffuse noise positions are appended, a contaminated copy is
//! re-sampled from the combined positions, and nomination quality is scored
//! by precision at `k` against known vertex classes.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use super::plot::{write_curve_plot, PlotSeries};
use crate::clustering::{fit_gmm, robust_kmeans, sphere_project, GmmConfig, RobustKmeansConfig, DEFAULT_LAMBDA};
use crate::error::{Error, Result, StageExt};
use crate::graph::Graph;
use crate::io::{write_json, write_labels};
use crate::linalg::{select_rows, vstack};
use crate::models::sample_independent;
use crate::nomination::{nominate_aligned, precision_at_k, write_curve_csv, EvalCurve, NominationList};
use crate::regularization::orthogonal_procrustes;
use crate::rng::SeedStream;
use crate::spectral::ase;

use rand::Rng as _;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, PartialEq)]
pub struct ResampleConfig {
    pub d: usize,
    /// Diffuse noise vertices appended to the re-sampled graph.
    pub m: usize,
    pub lambda: f64,
    pub r_star: Option<f64>,
    /// Clusters for both the clean mixture and robust K-means.
    pub k: usize,
    pub k_max: usize,
    pub gmm: GmmConfig,
}

impl Default for ResampleConfig {
    fn default() -> Self {
        ResampleConfig {
            d: 2,
            m: 500,
            lambda: DEFAULT_LAMBDA,
            r_star: None,
            k: 2,
            k_max: 100,
            gmm: GmmConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ResampleOutcome {
    /// Re-sampled graph: vertex `v < n` is the copy of observed vertex `v`,
    /// the remaining `m` vertices are noise.
    pub resampled: Graph,
    /// Re-sampled vertices kept by robust K-means, ascending.
    pub kept: Vec<usize>,
    /// Class of every observed vertex used for scoring.
    pub classes: Vec<usize>,
    pub lists: Vec<NominationList>,
    /// Precision at `k` per class.
    pub precision: BTreeMap<usize, EvalCurve>,
    /// Probabilities clipped into `[0, 1]` when re-sampling.
    pub clamped: usize,
}

impl ResampleOutcome {
    pub fn noise_removed(&self) -> f64 {
        let n = self.classes.len();
        let m = self.resampled.n() - n;
        if m == 0 {
            return 1.0;
        }
        1.0 - self.kept.iter().filter(|&&v| v >= n).count() as f64 / m as f64
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Rotation taking `source` centers onto `target` centers under the row
/// pairing with the smallest residual.
fn align_centers(source: &DMatrix<f64>, target: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if source.nrows() > 8 {
        return Err(Error::validation("cluster count", "center alignment supports at most 8 clusters"));
    }
    let mut best: Option<(f64, DMatrix<f64>)> = None;
    for perm in permutations(source.nrows()) {
        let t = select_rows(target, &perm);
        let w = orthogonal_procrustes(source, &t)?.w;
        let resid = (source * &w - &t).norm();
        if best.as_ref().map_or(true, |(r, _)| resid < *r - 1e-12) {
            best = Some((resid, w));
        }
    }
    Ok(best.expect("at least one permutation").1)
}

/// Runs the protocol on an observed graph. Without `classes`, vertex classes
/// come from a `k`-component mixture fit of the observed embedding.
pub fn resample_experiment(
    g: &Graph,
    classes: Option<&[usize]>,
    cfg: &ResampleConfig,
    seed: u64,
) -> Result<ResampleOutcome> {
    let n = g.n();
    if let Some(c) = classes {
        if c.len() != n {
            return Err(Error::validation("classes", format!("{} labels for {n} vertices", c.len())));
        }
    }
    let root = SeedStream::new(seed);
    let emb1 = ase(g, cfg.d).stage("embed observed graph")?;
    let clean_fit = fit_gmm(&emb1.x, cfg.k, &cfg.gmm, root.child("clean mixture").seed()).stage("cluster observed graph")?;
    let classes: Vec<usize> = match classes {
        Some(c) => c.to_vec(),
        None => clean_fit.model.assignments.iter().map(|l| l - 1).collect(),
    };

    // Noise uniform on the positive orthant of the unit sphere.
    let mut rng = root.child("noise").rng();
    let noise = DMatrix::from_fn(cfg.m, cfg.d, |_, _| rng.sample::<f64, _>(StandardNormal).abs());
    let noise = if cfg.m > 0 { sphere_project(&noise)? } else { noise };
    let x = vstack(&emb1.x, &noise)?;
    let sig = emb1.signature;
    let mut clamped = 0usize;
    let total = n + cfg.m;
    let mut p = DMatrix::zeros(total, total);
    for i in 0..total {
        for j in (i + 1)..total {
            let raw = sig.form(&crate::linalg::row_vec(&x, i), &crate::linalg::row_vec(&x, j));
            let v = raw.clamp(0.0, 1.0);
            if v != raw {
                clamped += 1;
            }
            p[(i, j)] = v;
            p[(j, i)] = v;
        }
    }
    if clamped > 0 {
        log::info!("clamped {clamped} re-sampling probabilities into [0, 1]");
    }
    let resampled = sample_independent(total, &mut root.child("resample").rng(), |i, j| p[(i, j)]);

    let emb2 = ase(&resampled, cfg.d).stage("embed re-sampled graph")?;
    // Isolated vertices embed at the origin and cannot be projected; they
    // are treated as noise.
    let nonzero: Vec<usize> = (0..total).filter(|&i| emb2.x.row(i).norm() > 0.0).collect();
    let projected = sphere_project(&select_rows(&emb2.x, &nonzero))?;
    let robust = RobustKmeansConfig {
        r_star: cfg.r_star,
        ..RobustKmeansConfig::new(cfg.k, cfg.lambda)
    };
    let model = robust_kmeans(&projected, &robust, root.child("robust").seed()).stage("robust clustering")?;
    let kept: Vec<usize> = model.clustered().into_iter().map(|i| nonzero[i]).collect();
    let kept_points = select_rows(&emb2.x, &kept);

    // Robust clusters summarized in the unprojected space.
    let mut robust_centers = DMatrix::zeros(cfg.k, cfg.d);
    let mut counts = vec![0usize; cfg.k];
    for (i, &l) in model.assignments.iter().enumerate() {
        if l > 0 {
            let row = emb2.x.row(nonzero[i]).into_owned();
            let mut target = robust_centers.row_mut(l - 1);
            target += row;
            counts[l - 1] += 1;
        }
    }
    for (c, &cnt) in counts.iter().enumerate() {
        if cnt == 0 {
            return Err(Error::DegenerateClustering(format!("robust cluster {} is empty", c + 1)));
        }
        robust_centers.row_mut(c).scale_mut(1.0 / cnt as f64);
    }
    let w = align_centers(&clean_fit.model.centers, &robust_centers).stage("align embeddings")?;
    let aligned = &emb1.x * w;

    let queries: Vec<usize> = (0..n).collect();
    let lists: Vec<NominationList> =
        nominate_aligned(&aligned, &kept_points, &queries, &cfg.gmm, root.child("nominate").seed())?
            .into_iter()
            .map(|l| l.translate(&kept))
            .collect();
    let mut candidate_classes: Vec<Option<usize>> = classes.iter().map(|&c| Some(c)).collect();
    candidate_classes.extend(std::iter::repeat(None).take(cfg.m));
    let precision = precision_at_k(&lists, &candidate_classes, cfg.k_max)?;
    Ok(ResampleOutcome {
        resampled,
        kept,
        classes,
        lists,
        precision,
        clamped,
    })
}

#[derive(Serialize)]
struct ResampleSummary {
    vertices: usize,
    noise: usize,
    kept: usize,
    noise_removed: f64,
    clamped: usize,
    precision_at: BTreeMap<usize, BTreeMap<usize, f64>>,
}

/// Writes `precision_class_<c>.csv` and `.svg` per class, the kept vertex
/// list and `summary.json`.
pub fn write_resample(outcome: &ResampleOutcome, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut precision_at = BTreeMap::new();
    for (class, curve) in &outcome.precision {
        write_curve_csv(dir.join(format!("precision_class_{class}.csv")), curve)?;
        write_curve_plot(
            &dir.join(format!("precision_class_{class}.svg")),
            &format!("precision at k, class {class}"),
            &PlotSeries {
                replicates: Vec::new(),
                mean: curve.values.clone(),
                chance: Some(curve.chance.clone()),
            },
        )?;
        let ks = [1, 10, 50, 100].into_iter().filter(|&k| k <= curve.k_max());
        precision_at.insert(*class, ks.map(|k| (k, curve.at(k))).collect());
    }
    write_labels(dir.join("kept.txt"), &outcome.kept)?;
    write_json(
        dir.join("summary.json"),
        &ResampleSummary {
            vertices: outcome.classes.len(),
            noise: outcome.resampled.n() - outcome.classes.len(),
            kept: outcome.kept.len(),
            noise_removed: outcome.noise_removed(),
            clamped: outcome.clamped,
            precision_at,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{sample_sbm, SbmSpec};

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(1), vec![vec![0]]);
    }

    #[test]
    fn recovers_a_reflected_pairing() {
        let src = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let tgt = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let w = align_centers(&src, &tgt).unwrap();
        assert!((&src * w - &tgt).norm() < 1e-12);
    }

    #[test]
    fn assortative_blocks_beat_chance() {
        let b = DMatrix::from_row_slice(2, 2, &[0.5, 0.05, 0.05, 0.4]);
        let (g, labels) = sample_sbm(&SbmSpec::with_sizes(b, vec![120, 80], 1.0).unwrap(), 11);
        let cfg = ResampleConfig {
            m: 60,
            k_max: 20,
            ..ResampleConfig::default()
        };
        let out = resample_experiment(&g, Some(&labels), &cfg, 5).unwrap();
        for curve in out.precision.values() {
            assert!(curve.at(10) > curve.chance[9] + 0.2, "{:?}", curve.values);
        }
        assert!(out.noise_removed() > 0.5);
    }
}
