use std::fs;

use anyhow::{bail, Context, Result};

use pmlda_core::corpus::grid_segmentation;
use pmlda_core::io;
use pmlda_core::synth::{generate_scene, synthetic_means, MixingModel, SceneSpec};

use crate::GenerateArgs;

pub fn run(args: GenerateArgs) -> Result<()> {
    let mixing: MixingModel = args.mixing.parse().map_err(anyhow::Error::msg)?;
    let means = match &args.means_file {
        Some(path) => {
            let means = io::read_matrix_csv(path)?;
            if means.len() != args.k {
                bail!(
                    "means file {} has {} rows, expected K = {}",
                    path.display(),
                    means.len(),
                    args.k
                );
            }
            if means.iter().any(|m| m.len() != args.bands) {
                bail!("means file rows must have {} bands", args.bands);
            }
            means
        }
        None => synthetic_means(args.k, args.bands),
    };
    let spec = SceneSpec {
        rows: args.rows,
        cols: args.cols,
        bands: args.bands,
        means,
        sigma2: args.sigma2,
        segmentation: grid_segmentation(args.rows, args.cols, args.block),
        alpha: args.alpha,
        lambda: args.lambda,
        seed: args.seed,
        mixing,
        pure_pixels: args.pure_pixels,
    };
    let (cube, truth) = generate_scene(&spec)?;

    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    io::write_cube(&args.out_dir.join("cube.raw"), &cube)?;
    io::write_segmentation_csv(&args.out_dir.join("segmentation.csv"), &spec.segmentation)?;
    io::write_truth(&args.out_dir.join("truth.json"), &truth)?;

    println!(
        "generated {}x{}x{} scene with K={} ({}) into {}",
        args.rows,
        args.cols,
        args.bands,
        args.k,
        mixing.as_str(),
        args.out_dir.display()
    );
    Ok(())
}
