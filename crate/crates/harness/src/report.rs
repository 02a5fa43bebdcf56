//! CSV output.

use std::path::Path;

use anyhow::Context;
use cva_greeks::greeks::EstimatorRun;

pub const HEADER: [&str; 7] = [
    "coordinate",
    "pillar_label",
    "mean",
    "variance",
    "half_ci_98",
    "wall_time_s",
    "efficiency",
];

/// One row per coordinate; floats in shortest round-trip scientific notation.
pub fn write_run(run: &EstimatorRun, path: &Path) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(HEADER)?;
    for i in 0..run.dim() {
        w.write_record([
            run.coordinates[i].clone(),
            run.pillar_labels[i].clone(),
            format!("{:e}", run.mean(i)),
            format!("{:e}", run.variance(i)),
            format!("{:e}", run.half_ci(i)),
            format!("{:e}", run.wall_time),
            format!("{:e}", run.efficiency(i)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Median over shared coordinates of efficiency(alt)/efficiency(reference).
///
/// Coordinates where either estimator has zero variance carry no information and
/// are skipped.
pub fn efficiency_ratio(reference: &EstimatorRun, alt: &EstimatorRun) -> Option<f64> {
    let mut r: Vec<f64> = reference
        .coordinates
        .iter()
        .enumerate()
        .filter_map(|(i, c)| {
            let j = alt.find(c)?;
            let (a, b) = (reference.efficiency(i), alt.efficiency(j));
            (a > 0.0 && b > 0.0).then(|| b / a)
        })
        .collect();
    if r.is_empty() {
        return None;
    }
    r.sort_by(f64::total_cmp);
    let n = r.len();
    Some(if n % 2 == 1 {
        r[n / 2]
    } else {
        0.5 * (r[n / 2 - 1] + r[n / 2])
    })
}

/// Rows (estimator, coordinate, pillar_label, efficiency, log10_efficiency) over
/// the coordinates of `runs` that appear in the first run.
pub fn write_efficiency_table(runs: &[&EstimatorRun], path: &Path) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record([
        "estimator",
        "coordinate",
        "pillar_label",
        "efficiency",
        "log10_efficiency",
    ])?;
    let Some(first) = runs.first() else {
        w.flush()?;
        return Ok(());
    };
    for run in runs {
        for (i, c) in first.coordinates.iter().enumerate() {
            let Some(j) = run.find(c) else { continue };
            let e = run.efficiency(j);
            w.write_record([
                run.estimator.clone(),
                c.clone(),
                first.pillar_labels[i].clone(),
                format!("{e:e}"),
                format!("{:e}", e.log10()),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
