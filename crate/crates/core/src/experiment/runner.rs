use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::index::sample as sample_indices;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, Method, DIFFERENCES};
use super::plot::{write_curve_plot, PlotSeries};
use super::scenario::{sample_scenario, ScenarioSample};
use crate::clustering::{GmmConfig, RobustKmeansConfig};
use crate::error::{Error, Result, StageExt};
use crate::io::{fmt_f64, write_json};
use crate::nomination::{
    nominate_aligned, nominate_with_seeds, rank_at_k_curve, write_curve_csv, EvalCurve, NominationList,
};
use crate::regularization::{
    block_trim, clean_diffuse, degree_trim_baseline, trim_cleaned, Alignment, DegreeTrimConfig, TrimConfig,
    TrimOutcome, DEFAULT_MATCH_CAP,
};
use crate::rng::SeedStream;
use crate::spectral::{ase, select_dimension, Embedding};

/// Per-method diagnostics of one replicate.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MethodDiagnostics {
    /// Pipeline error; the curve is all zeros when set.
    pub error: Option<String>,
    /// Contaminated-graph vertices left after trimming.
    pub retained: Option<usize>,
    /// How many of the retained vertices are core vertices.
    pub retained_core: Option<usize>,
    /// Whether the matched clusters are exactly the core blocks, judged by
    /// the majority ground-truth label of each matched cluster.
    pub matched_core: Option<bool>,
    pub k1: Option<usize>,
    pub k2: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub curve: EvalCurve,
    pub diagnostics: MethodDiagnostics,
}

/// Diagnostics of the shared robust cleaning stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CleaningDiagnostics {
    pub kept: usize,
    /// Fraction of diffuse noise vertices removed.
    pub noise_removed: Option<f64>,
    /// Fraction of non-diffuse vertices kept.
    pub signal_kept: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateResult {
    pub index: usize,
    pub methods: BTreeMap<Method, MethodOutcome>,
    pub cleaning: Option<CleaningDiagnostics>,
}

/// All replicates plus across-replicate summaries.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub config: ExperimentConfig,
    pub replicates: Vec<ReplicateResult>,
    /// Mean curve per method.
    pub means: BTreeMap<Method, EvalCurve>,
    /// Mean paired difference curves, keyed by comparison name.
    pub differences: BTreeMap<String, Vec<f64>>,
}

impl SimulationResult {
    /// Replicates in which `method` failed.
    pub fn failures(&self, method: Method) -> usize {
        self.replicates
            .iter()
            .filter(|r| r.methods.get(&method).is_some_and(|m| m.diagnostics.error.is_some()))
            .count()
    }
}

fn gmm_config(cfg: &ExperimentConfig) -> GmmConfig {
    GmmConfig {
        k_range: cfg.pipeline.k_range[0]..=cfg.pipeline.k_range[1],
        restarts: cfg.pipeline.gmm_restarts,
        ..GmmConfig::default()
    }
}

fn trim_config(cfg: &ExperimentConfig, alignment: Alignment) -> TrimConfig {
    let p = &cfg.pipeline;
    TrimConfig {
        d1: p.d1,
        d2: p.d2,
        elbow: p.elbow,
        k1: p.k1,
        k2: p.k2,
        gmm: gmm_config(cfg),
        match_cap: DEFAULT_MATCH_CAP,
        alignment,
    }
}

/// Lazily computed pieces shared between methods of one replicate.
struct Shared<'a> {
    cfg: &'a ExperimentConfig,
    sample: &'a ScenarioSample,
    stream: SeedStream,
    embedding_2: Option<Embedding>,
    kept: Option<std::result::Result<Vec<usize>, String>>,
}

impl Shared<'_> {
    fn d2(&self) -> Result<usize> {
        match self.cfg.pipeline.d2 {
            Some(d) => Ok(d),
            None => select_dimension(&self.sample.g2, self.cfg.pipeline.elbow, None),
        }
    }

    fn d1(&self) -> Result<usize> {
        match self.cfg.pipeline.d1 {
            Some(d) => Ok(d),
            None => select_dimension(&self.sample.g1, self.cfg.pipeline.elbow, None),
        }
    }

    fn embedding_2(&mut self) -> Result<&Embedding> {
        if self.embedding_2.is_none() {
            let d = self.d2()?;
            self.embedding_2 = Some(ase(&self.sample.g2, d).stage("embed contaminated graph")?);
        }
        Ok(self.embedding_2.as_ref().expect("just set"))
    }

    /// Contaminated embedding at dimension `d`, reusing the wide one when it
    /// already holds enough columns.
    fn embedding_2_at(&mut self, d: usize) -> Result<Embedding> {
        if let Ok(e) = self.embedding_2() {
            if d <= e.d() {
                return e.truncate(d);
            }
        }
        ase(&self.sample.g2, d).stage("embed contaminated graph")
    }

    fn kept(&mut self) -> Result<Vec<usize>> {
        if self.kept.is_none() {
            let result = (|| {
                let robust = RobustKmeansConfig {
                    r_star: self.cfg.pipeline.r_star,
                    restarts: self.cfg.pipeline.robust_restarts,
                    ..RobustKmeansConfig::new(self.cfg.clean_k(), self.cfg.pipeline.lambda)
                };
                let seed = self.stream.child("robust").seed();
                clean_diffuse(self.embedding_2()?, &robust, seed)
            })();
            self.kept = Some(result.map_err(|e| e.to_string()));
        }
        self.kept
            .clone()
            .expect("just set")
            .map_err(|msg| Error::Trim(format!("cleaning failed: {msg}")))
    }
}

fn nominate_outcome(
    out: &TrimOutcome,
    queries: &[usize],
    gmm: &GmmConfig,
    seed: u64,
) -> Result<Vec<NominationList>> {
    let lists = nominate_aligned(&out.aligned_embedding_1, &out.embedding_2.x, queries, gmm, seed)?;
    Ok(lists.into_iter().map(|l| l.translate(&out.vertex_map)).collect())
}

fn trim_diagnostics(out: &TrimOutcome, sample: &ScenarioSample, k: usize) -> MethodDiagnostics {
    let to_g2 = |v: usize| out.cleaned.as_ref().map_or(v, |kept| kept[v]);
    let mut majorities = Vec::new();
    for &c in &out.matching.mapping {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for v in out.model_2.members(c + 1) {
            *counts.entry(sample.labels[to_g2(v)]).or_default() += 1;
        }
        let top = counts.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(&l, _)| l);
        majorities.extend(top);
    }
    majorities.sort_unstable();
    let core_labels: Vec<usize> = (0..k).map(|b| 3 * b).collect();
    MethodDiagnostics {
        error: None,
        retained: Some(out.vertex_map.len()),
        retained_core: Some(
            out.vertex_map
                .iter()
                .filter(|&&v| ScenarioSample::is_core_label(sample.labels[v], k))
                .count(),
        ),
        matched_core: Some(majorities == core_labels),
        k1: Some(out.model_1.k()),
        k2: Some(out.model_2.k()),
    }
}

fn run_method(
    method: Method,
    shared: &mut Shared,
    seeds: &[(usize, usize)],
    queries: &[usize],
) -> Result<(Vec<NominationList>, MethodDiagnostics)> {
    let cfg = shared.cfg;
    let sample = shared.sample;
    let gmm = gmm_config(cfg);
    let stream = shared.stream.child(method.name());
    let nominate_seed = stream.child("nominate").seed();
    match method {
        Method::ModelTrim => {
            let out = block_trim(
                &sample.g1,
                &sample.g2,
                &trim_config(cfg, Alignment::ClusterCenters),
                stream.child("trim").seed(),
            )?;
            let diag = trim_diagnostics(&out, sample, cfg.k());
            Ok((nominate_outcome(&out, queries, &gmm, nominate_seed)?, diag))
        }
        Method::TwoStage | Method::TwoStageSeeded => {
            let kept = shared.kept()?;
            let alignment = if method == Method::TwoStage {
                Alignment::ClusterCenters
            } else {
                Alignment::Seeds(seeds.to_vec())
            };
            // Both variants share one trimming seed so they differ only in
            // the alignment step.
            let trim_seed = shared.stream.child("two stage trim").seed();
            let out = trim_cleaned(&sample.g1, &sample.g2, &kept, &trim_config(cfg, alignment), trim_seed)?;
            let diag = trim_diagnostics(&out, sample, cfg.k());
            Ok((nominate_outcome(&out, queries, &gmm, nominate_seed)?, diag))
        }
        Method::NoRegularization => {
            let d = shared.d1()?;
            let e1 = ase(&sample.g1, d).stage("embed clean graph")?;
            let e2 = shared.embedding_2_at(d)?;
            let lists = nominate_with_seeds(&e1.x, &e2.x, seeds, queries, &gmm, nominate_seed)?;
            let diag = MethodDiagnostics {
                retained: Some(sample.g2.n()),
                retained_core: Some(sample.truth.len()),
                ..MethodDiagnostics::default()
            };
            Ok((lists, diag))
        }
        Method::DegreeTrim => {
            let base = DegreeTrimConfig {
                grid_step: cfg.pipeline.degree_grid_step,
                d: Some(shared.d2()?),
                gmm: gmm.clone(),
            };
            let dt = degree_trim_baseline(&sample.g2, &base, stream.child("trim").seed())?;
            let d = shared.d1()?;
            let e1 = ase(&sample.g1, d).stage("embed clean graph")?;
            let e2 = ase(&dt.graph, d).stage("embed trimmed graph")?;
            let kept_seeds: Vec<(usize, usize)> = seeds
                .iter()
                .filter_map(|&(u, v)| dt.vertex_map.binary_search(&v).ok().map(|t| (u, t)))
                .collect();
            let lists = nominate_with_seeds(&e1.x, &e2.x, &kept_seeds, queries, &gmm, nominate_seed)?;
            let diag = MethodDiagnostics {
                retained: Some(dt.vertex_map.len()),
                retained_core: Some(
                    dt.vertex_map
                        .iter()
                        .filter(|&&v| ScenarioSample::is_core_label(sample.labels[v], cfg.k()))
                        .count(),
                ),
                ..MethodDiagnostics::default()
            };
            Ok((lists.into_iter().map(|l| l.translate(&dt.vertex_map)).collect(), diag))
        }
    }
}

/// Runs replicate `index` on its own; the result does not depend on which
/// other replicates run or in what order.
pub fn run_replicate(cfg: &ExperimentConfig, index: usize) -> Result<ReplicateResult> {
    let stream = SeedStream::new(cfg.seed).index(index as u64);
    let sample = sample_scenario(cfg, stream.child("sample").seed()).stage("sample replicate")?;
    let n_core = sample.truth.len();
    let mut seed_rng = stream.child("seeds").rng();
    let mut seed_vertices = sample_indices(&mut seed_rng, n_core, cfg.pipeline.seeds.min(n_core)).into_vec();
    seed_vertices.sort_unstable();
    let seeds: Vec<(usize, usize)> = seed_vertices.iter().map(|&u| (u, sample.truth[u])).collect();
    let queries: Vec<usize> = (0..n_core).collect();

    let mut shared = Shared {
        cfg,
        sample: &sample,
        stream,
        embedding_2: None,
        kept: None,
    };
    let mut methods = BTreeMap::new();
    for method in cfg.methods() {
        let started = std::time::Instant::now();
        let outcome = run_method(method, &mut shared, &seeds, &queries).and_then(|(lists, diag)| {
            let curve = rank_at_k_curve(&lists, |q| sample.truth.get(q).copied(), cfg.k_max, cfg.n2())?;
            Ok(MethodOutcome { curve, diagnostics: diag })
        });
        let outcome = outcome.unwrap_or_else(|e| {
            log::warn!("replicate {index}, {}: {e}", method.name());
            MethodOutcome {
                curve: zero_curve(cfg, n_core),
                diagnostics: MethodDiagnostics {
                    error: Some(e.to_string()),
                    ..MethodDiagnostics::default()
                },
            }
        });
        log::debug!("replicate {index}, {}: {:.1?}", method.name(), started.elapsed());
        methods.insert(method, outcome);
    }
    let k = cfg.k();
    let cleaning = match &shared.kept {
        Some(Ok(kept)) => {
            let mask = sample.diffuse_mask(k);
            let noise_total = mask.iter().filter(|&&x| x).count();
            let noise_kept = kept.iter().filter(|&&v| mask[v]).count();
            let signal_total = mask.len() - noise_total;
            Some(CleaningDiagnostics {
                kept: kept.len(),
                noise_removed: (noise_total > 0).then(|| 1.0 - noise_kept as f64 / noise_total as f64),
                signal_kept: (kept.len() - noise_kept) as f64 / signal_total as f64,
            })
        }
        _ => None,
    };
    Ok(ReplicateResult {
        index,
        methods,
        cleaning,
    })
}

fn zero_curve(cfg: &ExperimentConfig, queries: usize) -> EvalCurve {
    EvalCurve {
        values: vec![0.0; cfg.k_max],
        chance: (1..=cfg.k_max).map(|k| queries as f64 * k as f64 / cfg.n2() as f64).collect(),
    }
}

fn mean_curve(curves: &[&EvalCurve]) -> EvalCurve {
    let n = curves.len() as f64;
    let k = curves[0].k_max();
    let avg = |f: &dyn Fn(&EvalCurve) -> &Vec<f64>| -> Vec<f64> {
        (0..k).map(|i| curves.iter().map(|c| f(c)[i]).sum::<f64>() / n).collect()
    };
    EvalCurve {
        values: avg(&|c| &c.values),
        chance: avg(&|c| &c.chance),
    }
}

/// Runs every replicate, in parallel over `jobs` threads (all cores when
/// `None`), and summarizes.
pub fn run_simulation(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<SimulationResult> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let replicates: Vec<ReplicateResult> = pool.install(|| {
        (0..cfg.replicates)
            .into_par_iter()
            .map(|r| {
                log::info!("replicate {r} started");
                run_replicate(cfg, r)
            })
            .collect::<Result<_>>()
    })?;
    Ok(summarize(cfg.clone(), replicates))
}

/// Means and paired differences over already computed replicates.
pub fn summarize(config: ExperimentConfig, replicates: Vec<ReplicateResult>) -> SimulationResult {
    let mut means = BTreeMap::new();
    for method in config.methods() {
        let curves: Vec<&EvalCurve> = replicates.iter().filter_map(|r| r.methods.get(&method).map(|m| &m.curve)).collect();
        if !curves.is_empty() {
            means.insert(method, mean_curve(&curves));
        }
    }
    let mut differences = BTreeMap::new();
    for (name, a, b) in DIFFERENCES {
        if !(means.contains_key(&a) && means.contains_key(&b)) {
            continue;
        }
        let (ma, mb) = (&means[&a], &means[&b]);
        differences.insert(
            name.to_string(),
            ma.values.iter().zip(&mb.values).map(|(x, y)| x - y).collect(),
        );
    }
    SimulationResult {
        config,
        replicates,
        means,
        differences,
    }
}

#[derive(Serialize)]
struct MethodSummary {
    failures: usize,
    mean_at: BTreeMap<usize, f64>,
    chance_at: BTreeMap<usize, f64>,
    matched_core: Option<usize>,
}

#[derive(Serialize)]
struct ReplicateRecord<'a> {
    replicate: usize,
    methods: BTreeMap<&'static str, &'a MethodDiagnostics>,
    cleaning: &'a Option<CleaningDiagnostics>,
}

fn checkpoints(k_max: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = [1, 10, 25, 50, 100].into_iter().filter(|&k| k <= k_max).collect();
    if !ks.contains(&k_max) {
        ks.push(k_max);
    }
    ks
}

/// Writes curves, summaries and plots under `dir`:
///
/// * `replicates/<index>_<method>.csv`: one curve per replicate and method
/// * `curves.csv`: the same curves merged, long format
/// * `mean_<method>.csv`, `diff_<comparison>.csv`
/// * `summary.json`, `diagnostics.json`, `config.toml`
/// * `<method>.svg`, `diff_<comparison>.svg`
pub fn write_simulation(result: &SimulationResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let cfg = &result.config;
    std::fs::write(dir.join("config.toml"), cfg.to_toml_string())?;

    let per_rep = dir.join("replicates");
    std::fs::create_dir_all(&per_rep)?;
    let mut long = String::from("replicate,method,k,value,chance\n");
    for r in &result.replicates {
        for (m, o) in &r.methods {
            write_curve_csv(per_rep.join(format!("{:03}_{}.csv", r.index, m.name())), &o.curve)?;
            for (i, (v, c)) in o.curve.values.iter().zip(&o.curve.chance).enumerate() {
                let _ = writeln!(long, "{},{},{},{},{}", r.index, m.name(), i + 1, fmt_f64(*v), fmt_f64(*c));
            }
        }
    }
    std::fs::write(dir.join("curves.csv"), long)?;

    let mut summary: BTreeMap<&str, MethodSummary> = BTreeMap::new();
    for (m, mean) in &result.means {
        std::fs::write(dir.join(format!("mean_{}.csv", m.name())), mean.to_csv())?;
        let ks = checkpoints(mean.k_max());
        let matched: Vec<bool> = result
            .replicates
            .iter()
            .filter_map(|r| r.methods.get(m).and_then(|o| o.diagnostics.matched_core))
            .collect();
        summary.insert(
            m.name(),
            MethodSummary {
                failures: result.failures(*m),
                mean_at: ks.iter().map(|&k| (k, mean.at(k))).collect(),
                chance_at: ks.iter().map(|&k| (k, mean.chance[k - 1])).collect(),
                matched_core: (!matched.is_empty()).then(|| matched.iter().filter(|&&x| x).count()),
            },
        );
        let gray: Vec<Vec<f64>> = result
            .replicates
            .iter()
            .filter_map(|r| r.methods.get(m).map(|o| o.curve.values.clone()))
            .collect();
        write_curve_plot(
            &dir.join(format!("{}.svg", m.name())),
            &format!("{}: {}", cfg.name, m.name()),
            &PlotSeries {
                replicates: gray,
                mean: mean.values.clone(),
                chance: Some(mean.chance.clone()),
            },
        )?;
    }
    for (name, diff) in &result.differences {
        let mut csv = String::from("k,mean_difference\n");
        for (i, v) in diff.iter().enumerate() {
            let _ = writeln!(csv, "{},{}", i + 1, fmt_f64(*v));
        }
        std::fs::write(dir.join(format!("diff_{name}.csv")), csv)?;
        let (a, b) = DIFFERENCES
            .iter()
            .find(|d| d.0 == name)
            .map(|d| (d.1, d.2))
            .expect("known comparison");
        let paired: Vec<Vec<f64>> = result
            .replicates
            .iter()
            .filter_map(|r| {
                let (x, y) = (r.methods.get(&a)?, r.methods.get(&b)?);
                Some(x.curve.values.iter().zip(&y.curve.values).map(|(p, q)| p - q).collect())
            })
            .collect();
        write_curve_plot(
            &dir.join(format!("diff_{name}.svg")),
            &format!("{}: {name}", cfg.name),
            &PlotSeries {
                replicates: paired,
                mean: diff.clone(),
                chance: None,
            },
        )?;
    }
    write_json(dir.join("summary.json"), &summary)?;
    let records: Vec<ReplicateRecord> = result
        .replicates
        .iter()
        .map(|r| ReplicateRecord {
            replicate: r.index,
            methods: r.methods.iter().map(|(m, o)| (m.name(), &o.diagnostics)).collect(),
            cleaning: &r.cleaning,
        })
        .collect();
    write_json(dir.join("diagnostics.json"), &records)?;
    Ok(())
}
