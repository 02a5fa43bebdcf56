//! Experiment runner: builds the desk trade and models from a [`Config`], runs the
//! selected estimators and writes one CSV per experiment.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod report;

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Context;
use cva_greeks::convert::{Linearization, SpreadCalibration};
use cva_greeks::credit::{CreditModel, Dependence, GaussianCopula2, WeightScheme};
use cva_greeks::curves::{HazardCurve, ZeroCurve};
use cva_greeks::greeks::{self, BumpTarget, EstimatorRun, Experiment, Moments, RunConfig, Scheme, View};
use cva_greeks::hullwhite::{HullWhiteModel, SwapPricer, SwapSpec};
use cva_greeks::payoff::{CvaMode, CvaPayoff, Discounting, Exposure};

pub use config::{Cli, Config, DiscountKind, Estimator, Mode, Target, WeightKind};

/// Files written and the runs behind them.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub runs: BTreeMap<String, EstimatorRun>,
    pub ratios: Vec<EfficiencyRatio>,
}

/// Median efficiency(alternative) / efficiency(reference) within one family.
#[derive(Clone, Debug, PartialEq)]
pub struct EfficiencyRatio {
    pub family: String,
    pub reference: String,
    pub alternative: String,
    pub ratio: f64,
}

pub fn build_experiment(cfg: &Config) -> anyhow::Result<Experiment<CvaPayoff>> {
    let curve = ZeroCurve::from_csv(&cfg.rates_file)?;
    let own = HazardCurve::from_csv(&cfg.credit_file)?;
    let model = HullWhiteModel::new(cfg.kappa, cfg.sigma)?;
    let swap = SwapSpec {
        notional: cfg.notional,
        fixed_rate: cfg.fixed_rate,
        maturity_years: cfg.maturity_years,
        receive_fixed: cfg.receive_fixed,
    };
    let pricer = SwapPricer::new(model, curve, swap)?;
    let (mode, credit) = match cfg.mode {
        Mode::Unilateral => (CvaMode::Unilateral, CreditModel::single(own)),
        Mode::Bilateral => {
            let path = cfg
                .second_credit_file
                .as_ref()
                .context("bilateral mode needs second_credit_file")?;
            let second = HazardCurve::from_csv(path)?;
            let scheme = match cfg.weight_scheme {
                WeightKind::Censored => WeightScheme::Censored,
                WeightKind::SurvivorFree => WeightScheme::SurvivorFree,
            };
            let dep = Dependence::Gaussian(GaussianCopula2::new(cfg.rho)?);
            (CvaMode::Bilateral, CreditModel::new(vec![own, second], dep, scheme)?)
        }
    };
    let discounting = match cfg.discounting {
        DiscountKind::Pathwise => Discounting::Pathwise,
        DiscountKind::Deterministic => Discounting::Deterministic,
    };
    let payoff = CvaPayoff::new(pricer, cfg.lgd, mode, cfg.steps_per_year)?.with_discounting(discounting);
    Ok(Experiment::new(payoff, credit)?)
}

struct Layout {
    theta: Vec<String>,
    psi: Vec<String>,
    /// dθ/dc per θ coordinate under the spread calibration.
    spread_factor: f64,
}

impl Layout {
    fn new(x: &Experiment<CvaPayoff>, lgd: f64) -> anyhow::Result<Self> {
        let theta = x.credit.theta_labels();
        let psi = x.exposure.psi_labels();
        let cal = SpreadCalibration {
            lgd,
            n_credit: theta.len(),
            n_rates: psi.len(),
        };
        let mut m: Vec<f64> = x.credit.theta().iter().map(|t| t * lgd).collect();
        m.extend_from_slice(x.exposure.psi());
        let lin = Linearization::at(&cal, &m)?;
        Ok(Self {
            theta,
            psi,
            spread_factor: lin.sens[(0, 0)],
        })
    }

    fn nt(&self) -> usize {
        self.theta.len()
    }

    fn np(&self) -> usize {
        self.psi.len()
    }

    fn delta_views(&self) -> Vec<View> {
        let nt = self.nt();
        vec![
            View {
                coordinate: "theta[sum]".into(),
                label: "parallel".into(),
                terms: (0..nt).map(|i| (i, 1.0)).collect(),
            },
            View {
                coordinate: "psi[sum]".into(),
                label: "parallel".into(),
                terms: (nt..nt + self.np()).map(|i| (i, 1.0)).collect(),
            },
        ]
    }

    fn cross_views(&self, off: usize) -> Vec<View> {
        let (nt, np) = (self.nt(), self.np());
        let mut v: Vec<View> = (0..nt)
            .map(|i| View {
                coordinate: format!("theta_psi[{i}][sum]"),
                label: format!("{}|parallel", self.theta[i]),
                terms: (0..np).map(|j| (off + i * np + j, 1.0)).collect(),
            })
            .collect();
        v.extend((0..np).map(|j| View {
            coordinate: format!("theta_psi[sum][{j}]"),
            label: format!("parallel|{}", self.psi[j]),
            terms: (0..nt).map(|i| (off + i * np + j, 1.0)).collect(),
        }));
        v.push(View {
            coordinate: "theta_psi[sum][sum]".into(),
            label: "parallel|parallel".into(),
            terms: (0..nt * np).map(|k| (off + k, 1.0)).collect(),
        });
        v
    }

    fn credit_views(&self, off: usize) -> Vec<View> {
        let nt = self.nt();
        let mut v: Vec<View> = (0..nt)
            .map(|i| View {
                coordinate: format!("theta_theta[{i}][sum]"),
                label: format!("{}|parallel", self.theta[i]),
                terms: (0..nt).map(|j| (off + i * nt + j, 1.0)).collect(),
            })
            .collect();
        v.push(View {
            coordinate: "theta_theta[sum][sum]".into(),
            label: "parallel|parallel".into(),
            terms: (0..nt * nt).map(|k| (off + k, 1.0)).collect(),
        });
        v
    }

    /// Market (spread) version of a run: θ coordinates scaled by dθ/dc.
    fn to_spread(&self, run: &EstimatorRun) -> EstimatorRun {
        let f = self.spread_factor;
        let mut out = run.clone();
        out.estimator = format!("{}_spread", run.estimator);
        out.per_path = None;
        for (m, c) in out.moments.iter_mut().zip(&run.coordinates) {
            let k = if c.starts_with("theta_theta[") {
                f * f
            } else if c.starts_with("theta") {
                f
            } else {
                1.0
            };
            *m = Moments {
                n: m.n,
                mean: m.mean * k,
                m2: m.m2 * k * k,
            };
        }
        out
    }

    /// 10Y pillar, or the last pillar if none is labelled so.
    fn ten_year(labels: &[String]) -> usize {
        labels.iter().position(|l| l == "10Y").unwrap_or(labels.len() - 1)
    }
}

fn argmax_abs(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold(
            (0, -1.0),
            |(bi, bv), (i, x)| if x.abs() > bv { (i, x.abs()) } else { (bi, bv) },
        )
        .0
}

struct Writer<'a> {
    cfg: &'a Config,
    out: Outcome,
}

impl Writer<'_> {
    fn put(&mut self, stem: &str, run: EstimatorRun) -> anyhow::Result<()> {
        let path = self.cfg.out_dir.join(format!("{stem}.csv"));
        report::write_run(&run, &path)?;
        self.out.files.push(path);
        self.out.runs.insert(stem.to_string(), run);
        Ok(())
    }
}

fn bp_tag(bp: f64) -> String {
    format!("{bp}")
}

/// Runs every selected estimator and writes the reports into `cfg.out_dir`.
pub fn run(cfg: &Config) -> anyhow::Result<Outcome> {
    cfg.validate()?;
    let x = build_experiment(cfg)?;
    std::fs::create_dir_all(&cfg.out_dir).with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    let lay = Layout::new(&x, cfg.lgd)?;
    let (nt, np) = (lay.nt(), lay.np());
    let rc = RunConfig {
        n_paths: cfg.paths,
        seed: cfg.seed,
        workers: cfg.workers,
        store_cap: cfg.store_cap,
        record_timing: cfg.record_timing,
        views: Vec::new(),
    };
    let with_views = |views: Vec<View>| RunConfig { views, ..rc.clone() };
    let mut w = Writer {
        cfg,
        out: Outcome::default(),
    };
    let mut ad_delta: Option<EstimatorRun> = None;
    let mut selected: Vec<Estimator> = Vec::new();
    for e in &cfg.estimator {
        if !selected.contains(e) {
            selected.push(*e);
        }
    }
    let targets: &[BumpTarget] = match cfg.bump_target {
        Target::Credit => &[BumpTarget::Credit],
        Target::Rates => &[BumpTarget::Rates],
        Target::Both => &[BumpTarget::Credit, BumpTarget::Rates],
    };

    for est in &selected {
        match est {
            Estimator::Price => {
                let r = greeks::price(&x, &rc)?;
                w.put("price", r)?;
            }
            Estimator::Ad => {
                let r = greeks::delta_conditional(&x, &with_views(lay.delta_views()))?;
                w.put("delta_ad_spread", lay.to_spread(&r))?;
                w.put("delta_ad", r.clone())?;
                ad_delta = Some(r);
            }
            Estimator::Dist => {
                let r = greeks::delta_distributional(&x, &rc)?;
                w.put("delta_dist_spread", lay.to_spread(&r))?;
                w.put("delta_dist", r)?;
            }
            Estimator::Fd | Estimator::Cd => {
                let (scheme, tag) = if *est == Estimator::Fd {
                    (Scheme::Forward, "fd")
                } else {
                    (Scheme::Central, "cd")
                };
                for &bp in &cfg.bump_bp {
                    for &t in targets {
                        let r = greeks::bump_delta(&x, &rc, scheme, t, bp)?;
                        let stem = match t {
                            BumpTarget::Credit => format!("delta_{tag}{}_credit", bp_tag(bp)),
                            BumpTarget::Rates => format!("delta_{tag}{}_rates", bp_tag(bp)),
                        };
                        if t == BumpTarget::Credit {
                            w.put(&format!("{stem}_spread"), lay.to_spread(&r))?;
                        }
                        w.put(&stem, r)?;
                    }
                }
            }
            Estimator::Ad2 => {
                let cross = greeks::cross_gamma(&x, &with_views(lay.cross_views(0)))?;
                let credit = greeks::credit_gamma(&x, &with_views(lay.credit_views(0)))?;
                emit_gammas(&mut w, &lay, "ad2", cross, credit)?;
            }
            Estimator::Fdad | Estimator::Cdad => {
                let (scheme, tag) = if *est == Estimator::Fdad {
                    (Scheme::Forward, "fdad")
                } else {
                    (Scheme::Central, "cdad")
                };
                let base = nt * np + nt * nt;
                let cv = lay.cross_views(0);
                let kv = lay.credit_views(nt * np);
                let (ncv, nkv) = (cv.len(), kv.len());
                let views: Vec<View> = cv.into_iter().chain(kv).collect();
                for &bp in &cfg.bump_bp {
                    let r = greeks::bump_gamma(&x, &with_views(views.clone()), scheme, bp)?;
                    let name = format!("{tag}{}", bp_tag(bp));
                    let ci: Vec<usize> = (0..nt * np).chain(base..base + ncv).collect();
                    let ki: Vec<usize> = (nt * np..base).chain(base + ncv..base + ncv + nkv).collect();
                    let cross = r.select(&format!("{name}_cross"), &ci);
                    let credit = r.select(&format!("{name}_credit"), &ki);
                    emit_gammas(&mut w, &lay, &name, cross, credit)?;
                }
            }
        }
    }

    // pillar slices: 10Y and the largest first-order sensitivity
    if w.out.runs.keys().any(|k| k.starts_with("cross_gamma_")) {
        let delta = match ad_delta {
            Some(d) => d,
            None => greeks::delta_conditional(&x, &rc)?,
        };
        let means = delta.means();
        let picks = [
            ("10Y", Layout::ten_year(&lay.theta), Layout::ten_year(&lay.psi)),
            ("max", argmax_abs(&means[..nt]), argmax_abs(&means[nt..nt + np])),
        ];
        let stems: Vec<String> = w
            .out
            .runs
            .keys()
            .filter(|k| k.ends_with("gamma_ad2") || is_bump_gamma(k))
            .cloned()
            .collect();
        for stem in stems {
            let run = w.out.runs[&stem].clone();
            for (tag, ct, rp) in picks {
                let idx: Vec<usize> = if stem.starts_with("cross_gamma_") {
                    (0..nt).map(|i| i * np + rp).collect()
                } else {
                    (0..nt).map(|j| ct * nt + j).collect()
                };
                w.put(&format!("{stem}_slice_{tag}"), run.select(&run.estimator, &idx))?;
            }
        }
    }

    efficiency_tables(&mut w, nt)?;
    Ok(w.out)
}

fn is_bump_gamma(stem: &str) -> bool {
    let rest = stem
        .trim_start_matches("cross_gamma_")
        .trim_start_matches("credit_gamma_");
    (rest.starts_with("fdad") || rest.starts_with("cdad")) && !rest.contains("_")
}

fn emit_gammas(
    w: &mut Writer,
    lay: &Layout,
    name: &str,
    cross: EstimatorRun,
    credit: EstimatorRun,
) -> anyhow::Result<()> {
    w.put(&format!("cross_gamma_{name}_spread"), lay.to_spread(&cross))?;
    w.put(&format!("credit_gamma_{name}_spread"), lay.to_spread(&credit))?;
    w.put(&format!("cross_gamma_{name}"), cross)?;
    w.put(&format!("credit_gamma_{name}"), credit)?;
    Ok(())
}

/// Efficiency tables per family and a summary of median ratios against AD.
fn efficiency_tables(w: &mut Writer, nt: usize) -> anyhow::Result<()> {
    type IsAlt = fn(&str) -> bool;
    let fams: [(&str, &str, IsAlt); 3] = [
        ("delta", "delta_ad", |k| {
            (k.starts_with("delta_fd") || k.starts_with("delta_cd")) && k.ends_with("_credit") || k == "delta_dist"
        }),
        ("cross_gamma", "cross_gamma_ad2", |k| {
            k.starts_with("cross_gamma_") && is_bump_gamma(k)
        }),
        ("credit_gamma", "credit_gamma_ad2", |k| {
            k.starts_with("credit_gamma_") && is_bump_gamma(k)
        }),
    ];
    let mut rows = Vec::new();
    for (fam, reference, is_alt) in fams {
        let alts: Vec<&String> = w.out.runs.keys().filter(|k| is_alt(k)).collect();
        let Some(r) = w.out.runs.get(reference) else { continue };
        if alts.is_empty() {
            continue;
        }
        // credit coordinates only for deltas
        let r = if fam == "delta" {
            r.select(&r.estimator, &(0..nt).collect::<Vec<_>>())
        } else {
            r.clone()
        };
        let mut list = vec![&r];
        list.extend(alts.iter().map(|k| &w.out.runs[*k]));
        let path = w.cfg.out_dir.join(format!("efficiency_{fam}.csv"));
        report::write_efficiency_table(&list, &path)?;
        w.out.files.push(path);
        for k in &alts {
            if let Some(ratio) = report::efficiency_ratio(&r, &w.out.runs[*k]) {
                rows.push(EfficiencyRatio {
                    family: fam.to_string(),
                    reference: reference.to_string(),
                    alternative: k.to_string(),
                    ratio,
                });
            }
        }
    }
    if !rows.is_empty() {
        let path = w.cfg.out_dir.join("efficiency_summary.csv");
        let mut c = csv::Writer::from_path(&path)?;
        c.write_record(["family", "reference", "alternative", "median_efficiency_ratio"])?;
        for e in &rows {
            c.write_record([&e.family, &e.reference, &e.alternative, &format!("{:e}", e.ratio)])?;
        }
        c.flush()?;
        w.out.files.push(path);
    }
    w.out.ratios = rows;
    Ok(())
}
