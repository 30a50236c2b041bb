use std::fmt::Write as _;
use std::fs;

use anyhow::{bail, Context, Result};

use pmlda_core::corpus::normalize_pixels;
use pmlda_core::io;
use pmlda_core::metrics::{match_topics, ncm_log_likelihood, proportion_entropy, proportion_rmse};
use pmlda_core::types::Simplex;

use crate::commands::read_key_values;
use crate::EvaluateArgs;

pub fn run(args: EvaluateArgs) -> Result<()> {
    let cube = io::read_cube(&args.cube)?;
    let normalized = normalize_pixels(&cube)?;

    let endmembers = io::read_matrix_csv(&args.result_dir.join("endmembers.csv"))?;
    let k = endmembers.len();
    let proportions_raw = io::read_matrix_csv(&args.result_dir.join("proportions.csv"))?;
    let proportions: Vec<Simplex> = proportions_raw
        .into_iter()
        .map(Simplex::new)
        .collect::<pmlda_core::error::Result<_>>()?;

    let summary_path = args.result_dir.join("summary.txt");
    let summary = read_key_values(&summary_path)?;
    let sigma2: f64 = summary
        .get("sigma2")
        .with_context(|| format!("{}: missing sigma2", summary_path.display()))?
        .parse()
        .with_context(|| format!("{}: invalid sigma2", summary_path.display()))?;

    let entropy = proportion_entropy(&proportions);
    let ncm = ncm_log_likelihood(&normalized, &endmembers, &proportions, &vec![sigma2; k])?;

    let mut report = String::new();
    writeln!(report, "entropy={entropy}").unwrap();
    writeln!(report, "ncm_log_likelihood={ncm}").unwrap();
    let mut csv_header = String::from("# entropy,ncm_log_likelihood");
    let mut csv_row = format!("{entropy},{ncm}");

    if let Some(truth_path) = &args.truth {
        let truth = io::read_truth(truth_path)?;
        if truth.k != k {
            bail!(
                "truth record has K = {}, results have K = {}",
                truth.k,
                k
            );
        }
        let matching = match_topics(&endmembers, &truth.means)?;
        let truth_props = truth.membership_simplices()?;
        let rmse = proportion_rmse(&proportions, &truth_props, &matching.assignment)?;
        let assignment: Vec<String> = matching.assignment.iter().map(|j| j.to_string()).collect();
        writeln!(report, "assignment={}", assignment.join(",")).unwrap();
        for (topic, sad) in matching.per_topic_sad.iter().enumerate() {
            writeln!(report, "sad_{topic}={sad}").unwrap();
        }
        writeln!(report, "mean_sad={}", matching.mean_sad).unwrap();
        writeln!(report, "proportion_rmse={rmse}").unwrap();
        csv_header.push_str(",mean_sad,proportion_rmse");
        write!(csv_row, ",{},{rmse}", matching.mean_sad).unwrap();
    }

    print!("{report}");
    if let Some(out_csv) = &args.out_csv {
        fs::write(out_csv, format!("{csv_header}\n{csv_row}\n"))
            .with_context(|| format!("writing {}", out_csv.display()))?;
    }
    Ok(())
}
