use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::experiment::{CellResult, SweepResult};
use crate::error::Result;

/// Writes the sweep below `dir`, one subdirectory per policy:
///
/// ```text
/// <policy>/delay.csv        lambda,mean_delay_s,std_delay_s
/// <policy>/total_delay.csv  lambda,mean_total_delay_s,std_total_delay_s
/// <policy>/cache_hits.csv   lambda,mean_hit_bytes,std_hit_bytes
/// <policy>/raw/lambda_<l>_seed_<s>.csv     per-request delays
/// <policy>/nodes/lambda_<l>_seed_<s>.csv   per-node cache hit bytes
/// <policy>/traces/lambda_<l>_seed_<s>.csv.gz  packet trace, when recorded
/// ```
///
/// `policies` names the directories to create even when a policy has no
/// runs, which yields header-only files. Returns the files written.
pub fn emit_results(result: &SweepResult, policies: &[String], dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for policy in policies {
        let pdir = dir.join(policy);
        fs::create_dir_all(&pdir)?;
        let rows = result.rows(policy);
        let mut table = |name: &str, header: &str, pick: &dyn Fn(&super::SweepRow) -> (f64, f64)| -> Result<()> {
            let path = pdir.join(name);
            let mut out = BufWriter::new(File::create(&path)?);
            writeln!(out, "{header}")?;
            for r in &rows {
                let (m, s) = pick(r);
                writeln!(out, "{},{},{}", r.lambda, finite(m), finite(s))?;
            }
            out.flush()?;
            written.push(path);
            Ok(())
        };
        table("delay.csv", "lambda,mean_delay_s,std_delay_s", &|r| (r.mean_delay.mean, r.mean_delay.std))?;
        table("total_delay.csv", "lambda,mean_total_delay_s,std_total_delay_s", &|r| (r.total_delay.mean, r.total_delay.std))?;
        table("cache_hits.csv", "lambda,mean_hit_bytes,std_hit_bytes", &|r| (r.hit_bytes.mean, r.hit_bytes.std))?;

        let cells: Vec<&CellResult> = result.cells_for(policy).collect();
        if cells.is_empty() {
            continue;
        }
        for sub in ["raw", "nodes"] {
            fs::create_dir_all(pdir.join(sub))?;
        }
        for c in cells {
            let stem = run_stem(c);
            let path = pdir.join("raw").join(format!("{stem}.csv"));
            let mut out = BufWriter::new(File::create(&path)?);
            c.metrics.write_requests(&mut out)?;
            out.flush()?;
            written.push(path);

            let path = pdir.join("nodes").join(format!("{stem}.csv"));
            let mut out = BufWriter::new(File::create(&path)?);
            c.metrics.write_hits(&mut out, &c.labels)?;
            out.flush()?;
            written.push(path);

            if let Some(gz) = &c.trace_gz {
                fs::create_dir_all(pdir.join("traces"))?;
                let path = pdir.join("traces").join(format!("{stem}.csv.gz"));
                fs::write(&path, gz)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

fn run_stem(c: &CellResult) -> String {
    format!("lambda_{}_seed_{}", c.cell.lambda, c.cell.seed)
}

fn finite(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        0.0
    }
}
