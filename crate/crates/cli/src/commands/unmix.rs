use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};

use pmlda_core::corpus::{build_corpus, grid_segmentation, normalize_pixels, Corpus};
use pmlda_core::init::{initial_state, orthogonal_projection_endmembers};
use pmlda_core::io;
use pmlda_core::metrics::{ncm_log_likelihood, proportion_entropy};
use pmlda_core::sampler::{run_chain, summarize, ChainConfig, ChainTrace, Estimator, PointEstimate};
use pmlda_core::types::{Hyperparameters, WordLikelihoodMode};

use crate::config::{resolve, resolve_required, resolve_threads, ConfigFile};
use crate::UnmixArgs;

const DEFAULT_BLOCK: usize = 16;
const DEFAULT_T: usize = 2000;

struct Settings {
    cube: PathBuf,
    segmentation: Option<PathBuf>,
    k: usize,
    alpha: f64,
    lambda: f64,
    t: usize,
    burn_in: usize,
    seed: u64,
    threads: usize,
    mode: WordLikelihoodMode,
    estimator: Estimator,
    seeds_file: Option<PathBuf>,
    block: usize,
    out_dir: PathBuf,
}

fn settings(args: &UnmixArgs) -> Result<Settings> {
    let cfg = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let t = resolve(args.t, cfg.get("T")?, DEFAULT_T);
    let mode: String = resolve(args.mode.clone(), cfg.get("mode")?, "normalized".into());
    let estimator: String = resolve(args.estimator.clone(), cfg.get("estimator")?, "mean".into());
    Ok(Settings {
        cube: resolve_required(args.cube.clone(), cfg.get_path("cube"), "cube")?,
        segmentation: args.segmentation.clone().or(cfg.get_path("segmentation")),
        k: resolve_required(args.k, cfg.get("K")?, "K")?,
        alpha: resolve(args.alpha, cfg.get("alpha")?, 5.0),
        lambda: resolve(args.lambda, cfg.get("lambda")?, 1.0),
        t,
        burn_in: resolve(args.burn_in, cfg.get("burn_in")?, t / 2),
        seed: resolve(args.seed, cfg.get("seed")?, 0),
        threads: resolve_threads(args.threads, cfg.get("threads")?)?,
        mode: mode.parse().map_err(anyhow::Error::msg)?,
        estimator: estimator.parse().map_err(anyhow::Error::msg)?,
        seeds_file: args.seeds_file.clone().or(cfg.get_path("seeds_file")),
        block: resolve(args.block, cfg.get("block")?, DEFAULT_BLOCK),
        out_dir: resolve_required(args.out_dir.clone(), cfg.get_path("out_dir"), "out-dir")?,
    })
}

pub fn run(args: UnmixArgs) -> Result<()> {
    let settings = settings(&args)?;
    if settings.k == 0 {
        bail!("--K must be >= 1");
    }

    rayon::ThreadPoolBuilder::new()
        .num_threads(settings.threads)
        .build_global()
        .ok(); // already-initialized pools keep their size

    let raw_cube = io::read_cube(&settings.cube)?;
    let cube = normalize_pixels(&raw_cube)?;
    let seg = match &settings.segmentation {
        Some(path) => io::read_segmentation(path, cube.rows(), cube.cols())?,
        None => grid_segmentation(cube.rows(), cube.cols(), settings.block),
    };
    let corpus = build_corpus(cube, &seg)?;

    let seeds = match &settings.seeds_file {
        Some(path) => {
            let seeds = io::read_matrix_csv(path)?;
            if seeds.len() != settings.k {
                bail!(
                    "seeds file {} has {} rows, expected K = {}",
                    path.display(),
                    seeds.len(),
                    settings.k
                );
            }
            seeds
        }
        None => orthogonal_projection_endmembers(&corpus, settings.k)?,
    };

    let mut hp = Hyperparameters::new(settings.k);
    hp.alpha = settings.alpha;
    hp.lambda = settings.lambda;
    hp.t = settings.t;
    hp.burn_in = settings.burn_in;
    hp.seed = settings.seed;
    hp.word_likelihood_mode = settings.mode;
    hp.validate()?;

    let init = initial_state(&corpus, &hp, seeds)?;
    let mut chain = ChainConfig::new(hp.clone());
    chain.parallel_documents = true;
    // cap trace memory at ~1000 recorded states
    chain.record_every = (hp.t / 1000).max(1);
    let trace = run_chain(&corpus, &chain, init)?;
    let result = summarize(&trace, hp.burn_in)?;
    let estimate = result.estimate(settings.estimator);

    write_artifacts(&settings, &corpus, &trace, estimate, &raw_cube)?;
    println!("wrote results to {}", settings.out_dir.display());
    Ok(())
}

fn write_artifacts(
    settings: &Settings,
    corpus: &Corpus,
    trace: &ChainTrace,
    estimate: &PointEstimate,
    raw_cube: &pmlda_core::HyperspectralCube,
) -> Result<()> {
    let out = &settings.out_dir;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    io::write_matrix_csv(&out.join("endmembers.csv"), &estimate.model.means)?;

    let mut documents = String::from("# id,s,pi_0..pi_{K-1}\n");
    for (d, (s, pi)) in estimate.s.iter().zip(&estimate.pi).enumerate() {
        write!(documents, "{d},{s}").unwrap();
        for w in pi.weights() {
            write!(documents, ",{w}").unwrap();
        }
        documents.push('\n');
    }
    fs::write(out.join("documents.csv"), documents)?;

    let rows = estimate.proportion_rows(corpus);
    let proportions: Vec<Vec<f64>> = rows.iter().map(|z| z.weights().to_vec()).collect();
    io::write_matrix_csv(&out.join("proportions.csv"), &proportions)?;

    for topic in 0..settings.k {
        let data: Vec<u8> = rows
            .iter()
            .map(|z| (255.0 * z.weights()[topic]).round().clamp(0.0, 255.0) as u8)
            .collect();
        io::write_pgm(
            &out.join(format!("proportions_{topic}.pgm")),
            corpus.cols(),
            corpus.rows(),
            &data,
        )?;
    }

    let mut trace_csv =
        String::from("# iteration,log_joint,acc_pi,acc_s,acc_z,acc_mu,acc_sigma2\n");
    for record in &trace.iterations {
        let c = &record.counts;
        writeln!(
            trace_csv,
            "{},{},{},{},{},{},{}",
            record.iteration,
            record.log_joint,
            c.pi.rate(),
            c.s.rate(),
            c.z.rate(),
            c.mu.rate(),
            c.sigma2.rate()
        )
        .unwrap();
    }
    fs::write(out.join("trace.csv"), trace_csv)?;

    // metrics on the normalized cube, shared isotropic variance per topic
    let normalized = normalize_pixels(raw_cube)?;
    let entropy = proportion_entropy(&rows);
    let sigma2s = vec![estimate.model.sigma2; settings.k];
    let ncm = ncm_log_likelihood(&normalized, &estimate.model.means, &rows, &sigma2s)?;
    fs::write(
        out.join("metrics.txt"),
        format!("entropy={entropy}\nncm_log_likelihood={ncm}\n"),
    )?;
    fs::write(
        out.join("metrics.csv"),
        format!("# entropy,ncm_log_likelihood\n{entropy},{ncm}\n"),
    )?;

    let totals = trace.totals();
    let mut summary = String::new();
    writeln!(summary, "rows={}", corpus.rows()).unwrap();
    writeln!(summary, "cols={}", corpus.cols()).unwrap();
    writeln!(summary, "bands={}", corpus.bands()).unwrap();
    writeln!(summary, "documents={}", corpus.num_documents()).unwrap();
    writeln!(summary, "K={}", settings.k).unwrap();
    writeln!(summary, "alpha={}", settings.alpha).unwrap();
    writeln!(summary, "lambda={}", settings.lambda).unwrap();
    writeln!(summary, "T={}", settings.t).unwrap();
    writeln!(summary, "burn_in={}", settings.burn_in).unwrap();
    writeln!(summary, "seed={}", settings.seed).unwrap();
    writeln!(summary, "mode={}", settings.mode.as_str()).unwrap();
    writeln!(summary, "estimator={}", settings.estimator.as_str()).unwrap();
    writeln!(summary, "sigma2={}", estimate.model.sigma2).unwrap();
    writeln!(summary, "map_log_joint={}", trace.best_state.log_joint).unwrap();
    writeln!(summary, "map_iteration={}", trace.best_iteration).unwrap();
    writeln!(summary, "acc_pi={}", totals.pi.rate()).unwrap();
    writeln!(summary, "acc_s={}", totals.s.rate()).unwrap();
    writeln!(summary, "acc_z={}", totals.z.rate()).unwrap();
    writeln!(summary, "acc_mu={}", totals.mu.rate()).unwrap();
    writeln!(summary, "acc_sigma2={}", totals.sigma2.rate()).unwrap();
    fs::write(out.join("summary.txt"), summary)?;
    Ok(())
}
