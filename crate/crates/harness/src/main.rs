use clap::Parser;
use cva_harness::{run, Cli};

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let cfg = cli.resolve()?;
    let out = run(&cfg)?;
    if let Some(p) = out.runs.get("price") {
        println!(
            "price {:.2} ± {:.2} (98%), {} paths",
            p.mean(0),
            p.half_ci(0),
            p.n_paths
        );
    }
    for e in &out.ratios {
        println!(
            "{}: {} / {} efficiency ratio {:.3e}",
            e.family, e.alternative, e.reference, e.ratio
        );
    }
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
