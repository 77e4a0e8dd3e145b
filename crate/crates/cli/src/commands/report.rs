use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use crate::io;
use crate::svg;
use crate::tables::{self, AblationRow, CorrelationRow, FeatvalRow, Table, TransferRow, TrialRow};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Directory holding featval, stylocheck or correlation outputs.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn read_if<T: Table>(dir: &Path, name: &str) -> Result<Option<Vec<T>>> {
    let path = dir.join(name);
    if path.exists() {
        tables::read(&path).map(Some)
    } else {
        Ok(None)
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".into(), |x| format!("{x:.4}"))
}

pub fn run(args: &Args) -> Result<()> {
    if !args.input.is_dir() {
        bail!("{} is not a directory", args.input.display());
    }
    let featval = read_if::<FeatvalRow>(&args.input, "featval.csv")?;
    let correlations = read_if::<CorrelationRow>(&args.input, "correlations.csv")?;
    let transfer = read_if::<TransferRow>(&args.input, "transfer.csv")?;
    let trials = read_if::<TrialRow>(&args.input, "trials.csv")?;
    let ablation = read_if::<AblationRow>(&args.input, "ablation.csv")?;
    if featval.is_none() && correlations.is_none() && transfer.is_none() && trials.is_none() && ablation.is_none() {
        bail!("{} holds no report inputs", args.input.display());
    }
    io::out_dir(&args.out)?;
    let mut figures: Vec<(String, String)> = Vec::new();
    let mut summary = String::new();

    if let Some(rows) = &featval {
        let mut by_det: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
        for r in rows {
            by_det.entry(&r.detector).or_default().push((r.feature_gap, r.auroc));
        }
        if by_det.is_empty() {
            figures.push(("featval.svg".into(), svg::scatter("feature gap vs AUROC", "feature gap", "AUROC", &[])));
        }
        for (det, pts) in &by_det {
            figures.push((
                format!("featval_{det}.svg"),
                svg::scatter(&format!("{det}: feature gap vs AUROC"), "feature gap", "AUROC", pts),
            ));
        }
    }
    if let Some(rows) = &correlations {
        let _ = writeln!(summary, "correlations");
        for r in rows {
            let _ = writeln!(summary, "  {}\trho {}\tn {}", r.detector, fmt_opt(r.rho), r.n);
        }
    }
    if let Some(rows) = &transfer {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.gap, r.probe_auroc_mean)).collect();
        figures.push(("transfer.svg".into(), svg::scatter("transfer gap vs probe AUROC", "transfer gap", "mean probe AUROC", &pts)));
        let _ = writeln!(summary, "transfer");
        for r in rows {
            let _ = writeln!(summary, "  {}\tgap {:.4}\tprobe {:.4}\t{}", r.detector, r.gap, r.probe_auroc_mean, r.verdict);
        }
    }
    if let Some(rows) = &trials {
        let rs: Vec<f64> = rows.iter().filter_map(|t| t.r).collect();
        figures.push(("trials.svg".into(), svg::violin("trial r", "Pearson r", &rs, -1.0, 1.0)));
        let above = rs.iter().filter(|&&r| r > 0.5).count();
        let _ = writeln!(summary, "trials {}\tdefined {}\tr > 0.5 {}", rows.len(), rs.len(), above);
    }
    if let Some(rows) = &ablation {
        let pts: Vec<(f64, f64)> = rows.iter().filter_map(|a| a.mean_r.map(|m| (a.count as f64, m))).collect();
        figures.push(("ablation.svg".into(), svg::line("probes per trial", "probes per trial", "mean r", &pts)));
        let _ = writeln!(summary, "ablation");
        for a in rows {
            let _ = writeln!(summary, "  {}\tmean r {}\tstd {}", a.count, fmt_opt(a.mean_r), fmt_opt(a.std_r));
        }
    }
    for (name, body) in &figures {
        let path = args.out.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    }
    let path = args.out.join("summary.txt");
    fs::write(&path, summary).with_context(|| format!("writing {}", path.display()))?;
    println!("{} figures in {}", figures.len(), args.out.display());
    Ok(())
}
