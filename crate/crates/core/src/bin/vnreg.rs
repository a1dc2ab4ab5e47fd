use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;

use vnreg::clustering::{gmm_bic_with, GmmConfig, RobustKmeansConfig, DEFAULT_LAMBDA};
use vnreg::experiment::{resample_experiment, run_simulation, write_resample, write_simulation, ExperimentConfig, ResampleConfig};
use vnreg::io::{read_edge_list, read_labels, read_pairs, read_vertex_list, write_json, write_labels};
use vnreg::linalg::{select_rows, vstack};
use vnreg::models::build_contaminated_block_matrix;
use vnreg::nomination::{mahalanobis_rank, mahalanobis_rank_set, nominate_with_seeds, write_nominations_csv, NominationList};
use vnreg::regularization::{
    check_separation, clean_diffuse, trim_cleaned, write_trim_outcome, Alignment, SeparationMode, TrimConfig,
    TrimOutcome,
};
use vnreg::spectral::{ase, select_dimension, spectrum, write_embedding};
use vnreg::{Error, Graph, Result};

/// Vertex nomination across a clean and a contaminated graph.
#[derive(Parser)]
#[command(name = "vnreg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment described by a TOML config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; all cores by default.
        #[arg(long)]
        jobs: Option<usize>,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the replicate count.
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        d1: Option<usize>,
        #[arg(long)]
        d2: Option<usize>,
        #[arg(long)]
        elbow: Option<usize>,
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Rank vertices of a second graph for query vertices of the first.
    Nominate {
        /// Clean graph edge list.
        g1: PathBuf,
        /// Contaminated graph edge list.
        g2: PathBuf,
        /// Query vertex ids of the clean graph, one per line.
        queries: PathBuf,
        #[command(flatten)]
        pipe: PipelineArgs,
        /// Skip model-space trimming; requires --seeds-file.
        #[arg(long)]
        no_trim: bool,
        /// One list for the whole query set instead of one per query.
        #[arg(long)]
        set: bool,
    },
    /// Re-sample a noisy copy of one observed graph and score precision at k.
    ResampleExperiment {
        graph: PathBuf,
        /// Class label per vertex, one per line; mixture labels otherwise.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Noise vertices to add.
        #[arg(long, default_value_t = 500)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_LAMBDA)]
        lambda: f64,
        #[arg(long, default_value_t = 100)]
        k_max: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate the matching-separation margins of a config's block matrix.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// Adjacency spectral embedding of an edge list.
    Embed {
        graph: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Fixed dimension; elbow-selected otherwise.
        #[arg(long)]
        d1: Option<usize>,
        #[arg(long, default_value_t = 1)]
        elbow: usize,
    },
    /// Trim a contaminated graph against a clean one and write the outcome.
    Clean {
        g1: PathBuf,
        g2: PathBuf,
        #[command(flatten)]
        pipe: PipelineArgs,
    },
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    d1: Option<usize>,
    #[arg(long)]
    d2: Option<usize>,
    #[arg(long, default_value_t = 1)]
    elbow: usize,
    #[arg(long)]
    k1: Option<usize>,
    #[arg(long)]
    k2: Option<usize>,
    /// Largest cluster count tried by BIC.
    #[arg(long, default_value_t = 9)]
    k_max: usize,
    /// Strip diffuse noise with robust K-means first.
    #[arg(long)]
    robust: bool,
    /// Robust K-means cluster count; BIC-selected otherwise.
    #[arg(long)]
    clean_k: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    lambda: f64,
    #[arg(long)]
    r_star: Option<f64>,
    /// `(clean id, contaminated id)` pairs, one per line; enables seeded
    /// alignment.
    #[arg(long)]
    seeds_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl PipelineArgs {
    fn gmm(&self) -> GmmConfig {
        GmmConfig {
            k_range: 1..=self.k_max.max(1),
            ..GmmConfig::default()
        }
    }

    fn trim(&self, seeds: Option<Vec<(usize, usize)>>) -> TrimConfig {
        TrimConfig {
            d1: self.d1,
            d2: self.d2,
            elbow: self.elbow,
            k1: self.k1,
            k2: self.k2,
            gmm: self.gmm(),
            alignment: seeds.map_or(Alignment::ClusterCenters, Alignment::Seeds),
            ..TrimConfig::default()
        }
    }

    fn seeds(&self) -> Result<Option<Vec<(usize, usize)>>> {
        self.seeds_file.as_ref().map(read_pairs).transpose()
    }

    /// Vertices of `g2` kept by the optional robust stage.
    fn kept(&self, g2: &Graph) -> Result<Vec<usize>> {
        if !self.robust {
            return Ok((0..g2.n()).collect());
        }
        let d = match self.d2 {
            Some(d) => d,
            None => select_dimension(g2, self.elbow, None)?,
        };
        let emb = ase(g2, d)?;
        let k = match self.clean_k.or(self.k2) {
            Some(k) => k,
            None => gmm_bic_with(&emb.x, &self.gmm(), self.seed)?.k(),
        };
        let robust = RobustKmeansConfig {
            r_star: self.r_star,
            ..RobustKmeansConfig::new(k, self.lambda)
        };
        let kept = clean_diffuse(&emb, &robust, self.seed)?;
        log::info!("robust stage kept {} of {} vertices", kept.len(), g2.n());
        Ok(kept)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::Config(_) | Error::Validation { .. } | Error::MatchSize { .. } => 2,
        Error::Io(_) | Error::Parse { .. } | Error::Json(_) => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("VNREG_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate {
            config,
            seed,
            jobs,
            out,
            replicates,
            d1,
            d2,
            elbow,
            lambda,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = replicates {
                cfg.replicates = r;
            }
            cfg.pipeline.d1 = d1.or(cfg.pipeline.d1);
            cfg.pipeline.d2 = d2.or(cfg.pipeline.d2);
            cfg.pipeline.elbow = elbow.unwrap_or(cfg.pipeline.elbow);
            cfg.pipeline.lambda = lambda.unwrap_or(cfg.pipeline.lambda);
            cfg.validate()?;
            let dir = out
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
            let result = run_simulation(&cfg, jobs)?;
            write_simulation(&result, &dir)?;
            for (m, mean) in &result.means {
                let k = mean.k_max().min(50);
                println!(
                    "{:<20} mean at k={k}: {:.2} (chance {:.2}), failures {}",
                    m.name(),
                    mean.at(k),
                    mean.chance[k - 1],
                    result.failures(*m)
                );
            }
            println!("wrote {}", dir.display());
            Ok(())
        }
        Command::Nominate {
            g1,
            g2,
            queries,
            pipe,
            no_trim,
            set,
        } => nominate(&g1, &g2, &queries, &pipe, no_trim, set),
        Command::ResampleExperiment {
            graph,
            labels,
            out,
            d,
            m,
            k,
            lambda,
            k_max,
            seed,
        } => {
            let g = read_edge_list(&graph)?;
            let classes = labels.map(read_labels).transpose()?;
            let cfg = ResampleConfig {
                d,
                m,
                k,
                lambda,
                k_max,
                ..ResampleConfig::default()
            };
            let outcome = resample_experiment(&g, classes.as_deref(), &cfg, seed)?;
            write_resample(&outcome, &out)?;
            for (class, curve) in &outcome.precision {
                let kk = curve.k_max().min(50);
                println!(
                    "class {class}: precision at {kk} = {:.3} (chance {:.3})",
                    curve.at(kk),
                    curve.chance[kk - 1]
                );
            }
            println!("noise removed: {:.3}", outcome.noise_removed());
            Ok(())
        }
        Command::Check { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let b = cfg.block_matrix() * cfg.model.nu;
            let (sp, sm) = (cfg.contamination.s_plus, cfg.contamination.s_minus);
            let bc = build_contaminated_block_matrix(&b, sp, sm)?;
            println!("contaminated block matrix:");
            for r in 0..bc.nrows() {
                let row: Vec<String> = (0..bc.ncols()).map(|c| format!("{:.4}", bc[(r, c)])).collect();
                println!("  {}", row.join(" "));
            }
            for mode in [SeparationMode::Diagonal, SeparationMode::OffDiagonal] {
                println!("{}", check_separation(&b, sp, sm, mode)?);
            }
            Ok(())
        }
        Command::Embed {
            graph,
            out,
            d1,
            elbow,
        } => {
            let g = read_edge_list(&graph)?;
            let d = match d1 {
                Some(d) => d,
                None => select_dimension(&g, elbow, None)?,
            };
            let emb = ase(&g, d)?;
            std::fs::create_dir_all(&out)?;
            write_embedding(&out, "embedding", &emb)?;
            let spec = spectrum(&g);
            let top: Vec<String> = spec.iter().take(10).map(|v| format!("{v:.3}")).collect();
            println!("dimension {d}, signature {}", emb.signature);
            println!("leading eigenvalues: {}", top.join(" "));
            Ok(())
        }
        Command::Clean { g1, g2, pipe } => {
            let (g1, g2) = (read_edge_list(&g1)?, read_edge_list(&g2)?);
            let out = trim(&g1, &g2, &pipe)?;
            write_trim_outcome(&pipe.out, &out)?;
            if let Some(kept) = &out.cleaned {
                write_labels(pipe.out.join("cleaned.txt"), kept)?;
            }
            println!(
                "kept {} of {} vertices (matched blocks {:?})",
                out.vertex_map.len(),
                g2.n(),
                out.matching.mapping
            );
            Ok(())
        }
    }
}

fn trim(g1: &Graph, g2: &Graph, pipe: &PipelineArgs) -> Result<TrimOutcome> {
    let kept = pipe.kept(g2)?;
    let mut out = trim_cleaned(g1, g2, &kept, &pipe.trim(pipe.seeds()?), pipe.seed)?;
    if !pipe.robust {
        out.cleaned = None;
    }
    Ok(out)
}

fn rank(
    p1: &DMatrix<f64>,
    p2: &DMatrix<f64>,
    queries: &[usize],
    gmm: &GmmConfig,
    seed: u64,
    set: bool,
) -> Result<Vec<NominationList>> {
    let joint = gmm_bic_with(&vstack(p1, p2)?, gmm, seed)?;
    if set {
        Ok(vec![mahalanobis_rank_set(&joint, p1, p2, queries)?])
    } else {
        mahalanobis_rank(&joint, p1, p2, queries)
    }
}

fn nominate(g1: &Path, g2: &Path, queries: &Path, pipe: &PipelineArgs, no_trim: bool, set: bool) -> Result<()> {
    let (g1, g2) = (read_edge_list(g1)?, read_edge_list(g2)?);
    let queries = read_vertex_list(queries)?;
    if let Some(&q) = queries.iter().find(|&&q| q >= g1.n()) {
        return Err(Error::Config(format!("query {q} is not a vertex of the clean graph")));
    }
    let gmm = pipe.gmm();
    let lists = if no_trim {
        let seeds = pipe
            .seeds()?
            .ok_or_else(|| Error::Config("--no-trim needs --seeds-file for alignment".into()))?;
        let kept = pipe.kept(&g2)?;
        let d = match pipe.d1 {
            Some(d) => d,
            None => select_dimension(&g1, pipe.elbow, None)?,
        };
        let e1 = ase(&g1, d)?;
        let e2 = ase(&g2.induced(&kept), d)?;
        let local: Vec<(usize, usize)> = seeds
            .iter()
            .filter_map(|&(u, v)| kept.binary_search(&v).ok().map(|t| (u, t)))
            .collect();
        let lists = if set {
            let w = vnreg::regularization::orthogonal_procrustes(
                &select_rows(&e1.x, &local.iter().map(|s| s.0).collect::<Vec<_>>()),
                &select_rows(&e2.x, &local.iter().map(|s| s.1).collect::<Vec<_>>()),
            )?
            .w;
            rank(&(&e1.x * w), &e2.x, &queries, &gmm, pipe.seed, true)?
        } else {
            nominate_with_seeds(&e1.x, &e2.x, &local, &queries, &gmm, pipe.seed)?
        };
        lists.into_iter().map(|l| l.translate(&kept)).collect::<Vec<_>>()
    } else {
        let out = trim(&g1, &g2, pipe)?;
        rank(&out.aligned_embedding_1, &out.embedding_2.x, &queries, &gmm, pipe.seed, set)?
            .into_iter()
            .map(|l| l.translate(&out.vertex_map))
            .collect()
    };
    std::fs::create_dir_all(&pipe.out)?;
    write_nominations_csv(pipe.out.join("nominations.csv"), &lists)?;
    write_json(
        pipe.out.join("summary.json"),
        &serde_json::json!({
            "queries": queries.len(),
            "candidates": lists.first().map_or(0, |l| l.ranked.len()),
            "trimmed": !no_trim,
        }),
    )?;
    println!("wrote {} lists to {}", lists.len(), pipe.out.display());
    Ok(())
}
