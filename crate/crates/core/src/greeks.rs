//! Monte Carlo estimators for the price and its θ/ψ sensitivities.
//!
//! Paths are processed in fixed blocks keyed by path index; each block keeps
//! Welford moments, and blocks are merged in a fixed pairwise tree. Results are
//! therefore bit-identical for any worker count.

use std::time::Instant;

use rayon::prelude::*;

use crate::adcore::{self, Scalar, ScalarFn};
use crate::credit::{CreditModel, DefaultSample};
use crate::curves::HazardCurve;
use crate::error::{invalid, Error, Result};
use crate::payoff::{self, CvaMode, Exposure};
use crate::rng::PathRng;

const BLOCK: usize = 512;

/// z such that Φ(z) = 0.99.
pub const Z98: f64 = 2.326_347_874_040_841;

/// A payoff together with its default model.
#[derive(Clone, Debug)]
pub struct Experiment<E> {
    pub exposure: E,
    pub credit: CreditModel,
}

impl<E: Exposure + Clone> Experiment<E> {
    pub fn new(exposure: E, credit: CreditModel) -> Result<Self> {
        if exposure.mode() == CvaMode::Bilateral && credit.n_names() < 2 {
            return Err(invalid("bilateral CVA needs two names"));
        }
        Ok(Self { exposure, credit })
    }

    /// Default information first, then the rate path, from the same stream.
    pub fn scenario(&self, rng: &mut PathRng) -> (DefaultSample, E::Path) {
        let s = self.credit.sample(rng, self.exposure.horizon());
        let p = self.exposure.simulate(rng);
        (s, p)
    }

    pub fn n_theta(&self) -> usize {
        self.credit.n_theta()
    }

    pub fn n_psi(&self) -> usize {
        self.exposure.psi().len()
    }

    /// f on one scenario.
    pub fn payoff(&self, s: &DefaultSample, path: &E::Path) -> f64 {
        payoff::evaluate(&self.exposure, self.exposure.psi(), s, path)
    }

    /// Conditional first-order contribution: θ part f·∂w/∂θ, ψ part ∂f/∂ψ.
    fn conditional(&self, s: &DefaultSample, path: &E::Path, out: &mut [f64]) -> Result<f64> {
        let nt = self.n_theta();
        let (f, gpsi) = payoff::value_and_psi_gradient(&self.exposure, s, path);
        out[nt..].copy_from_slice(&gpsi);
        if f != 0.0 {
            let w = self.credit.weight(s, false)?;
            for (o, g) in out[..nt].iter_mut().zip(&w.grad) {
                *o = f * g;
            }
        } else {
            out[..nt].fill(0.0);
        }
        Ok(f)
    }
}

/// Streaming mean and sum of squared deviations.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, o: &Self) -> Self {
        if self.n == 0 {
            return *o;
        }
        if o.n == 0 {
            return *self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        let w = o.n as f64 / n as f64;
        Self {
            n,
            mean: self.mean + d * w,
            m2: self.m2 + o.m2 + d * d * self.n as f64 * w,
        }
    }

    /// Sample variance of one path's contribution.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub n_paths: usize,
    pub seed: u64,
    pub workers: usize,
    /// Per-path values are kept while n_paths × dimension stays below this.
    pub store_cap: usize,
    /// When false, wall times are reported as 0 so outputs are reproducible byte for byte.
    pub record_timing: bool,
    /// Extra coordinates accumulated per path as weighted sums of the estimator's own.
    pub views: Vec<View>,
}

/// A linear combination of output coordinates, e.g. a parallel-shift aggregate.
#[derive(Clone, Debug, PartialEq)]
pub struct View {
    pub coordinate: String,
    pub label: String,
    pub terms: Vec<(usize, f64)>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            seed: 1,
            workers: 1,
            store_cap: 4_000_000,
            record_timing: true,
            views: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        Self {
            n_paths,
            seed,
            ..Self::default()
        }
    }
}

/// Statistics of one estimator over its output coordinates.
#[derive(Clone, Debug)]
pub struct EstimatorRun {
    pub estimator: String,
    pub coordinates: Vec<String>,
    pub pillar_labels: Vec<String>,
    pub moments: Vec<Moments>,
    /// Path-major contributions, n_paths × dim, when under the storage cap.
    pub per_path: Option<Vec<f64>>,
    pub n_paths: usize,
    pub seed: u64,
    pub wall_time: f64,
}

impl EstimatorRun {
    pub fn dim(&self) -> usize {
        self.moments.len()
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.moments[i].mean
    }

    pub fn means(&self) -> Vec<f64> {
        self.moments.iter().map(|m| m.mean).collect()
    }

    pub fn variance(&self, i: usize) -> f64 {
        self.moments[i].variance()
    }

    /// Standard error of the mean.
    pub fn std_error(&self, i: usize) -> f64 {
        (self.variance(i) / self.n_paths as f64).sqrt()
    }

    pub fn half_ci(&self, i: usize) -> f64 {
        Z98 * self.std_error(i)
    }

    /// Wall time × variance of the estimate; lower is better and n-invariant.
    pub fn efficiency(&self, i: usize) -> f64 {
        self.wall_time * self.variance(i) / self.n_paths as f64
    }

    /// The given coordinates as a run of their own, sharing the wall time.
    pub fn select(&self, name: &str, idx: &[usize]) -> Self {
        let dim = self.dim();
        let per_path = self
            .per_path
            .as_ref()
            .map(|v| v.chunks(dim).flat_map(|row| idx.iter().map(move |&i| row[i])).collect());
        Self {
            estimator: name.to_string(),
            coordinates: idx.iter().map(|&i| self.coordinates[i].clone()).collect(),
            pillar_labels: idx.iter().map(|&i| self.pillar_labels[i].clone()).collect(),
            moments: idx.iter().map(|&i| self.moments[i]).collect(),
            per_path,
            n_paths: self.n_paths,
            seed: self.seed,
            wall_time: self.wall_time,
        }
    }

    /// Index of a coordinate by name.
    pub fn find(&self, coordinate: &str) -> Option<usize> {
        self.coordinates.iter().position(|c| c == coordinate)
    }
}

fn tree_merge(mut level: Vec<Vec<Moments>>) -> Vec<Moments> {
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|c| match c {
                [a, b] => a.iter().zip(b).map(|(x, y)| x.merge(y)).collect(),
                [a] => a.clone(),
                _ => unreachable!(),
            })
            .collect();
    }
    level.pop().unwrap_or_default()
}

/// Runs `kernel(path, out)` on every path and reduces.
fn run_paths<K>(cfg: &RunConfig, dim: usize, kernel: K) -> Result<(Vec<Moments>, Option<Vec<f64>>, f64)>
where
    K: Fn(u64, &mut [f64]) -> Result<()> + Sync,
{
    if cfg.n_paths == 0 {
        return Err(invalid("n_paths must be at least 1"));
    }
    let base_dim = dim;
    for v in &cfg.views {
        if let Some(&(i, _)) = v.terms.iter().find(|(i, _)| *i >= base_dim) {
            return Err(invalid(format!(
                "view {} refers to coordinate {i} of {base_dim}",
                v.coordinate
            )));
        }
    }
    let dim = dim + cfg.views.len();
    let store = cfg.n_paths.saturating_mul(dim) <= cfg.store_cap;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| invalid(format!("worker pool: {e}")))?;
    let n_blocks = cfg.n_paths.div_ceil(BLOCK);
    let start = Instant::now();
    let blocks: Vec<(Vec<Moments>, Vec<f64>)> = pool.install(|| {
        (0..n_blocks)
            .into_par_iter()
            .map(|b| {
                let lo = b * BLOCK;
                let hi = (lo + BLOCK).min(cfg.n_paths);
                let mut m = vec![Moments::default(); dim];
                let mut kept = Vec::with_capacity(if store { (hi - lo) * dim } else { 0 });
                let mut out = vec![0.0; dim];
                for p in lo..hi {
                    out.fill(0.0);
                    kernel(p as u64, &mut out[..base_dim])?;
                    for (k, v) in cfg.views.iter().enumerate() {
                        out[base_dim + k] = v.terms.iter().map(|&(i, w)| w * out[i]).sum();
                    }
                    for (mi, &x) in m.iter_mut().zip(&out) {
                        mi.push(x);
                    }
                    if store {
                        kept.extend_from_slice(&out);
                    }
                }
                Ok((m, kept))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let wall = if cfg.record_timing {
        start.elapsed().as_secs_f64()
    } else {
        0.0
    };
    let (moments, kept): (Vec<_>, Vec<_>) = blocks.into_iter().unzip();
    let per_path = store.then(|| kept.concat());
    Ok((tree_merge(moments), per_path, wall))
}

fn finish(
    name: &str,
    cfg: &RunConfig,
    mut coordinates: Vec<String>,
    mut pillar_labels: Vec<String>,
    (moments, per_path, wall_time): (Vec<Moments>, Option<Vec<f64>>, f64),
) -> EstimatorRun {
    for v in &cfg.views {
        coordinates.push(v.coordinate.clone());
        pillar_labels.push(v.label.clone());
    }
    EstimatorRun {
        estimator: name.to_string(),
        coordinates,
        pillar_labels,
        moments,
        per_path,
        n_paths: cfg.n_paths,
        seed: cfg.seed,
        wall_time,
    }
}

fn vector_coords(kind: &str, labels: &[String]) -> (Vec<String>, Vec<String>) {
    let c = (0..labels.len()).map(|i| format!("{kind}[{i}]")).collect();
    (c, labels.to_vec())
}

fn matrix_coords(kind: &str, rows: &[String], cols: &[String]) -> (Vec<String>, Vec<String>) {
    let mut c = Vec::with_capacity(rows.len() * cols.len());
    let mut l = Vec::with_capacity(rows.len() * cols.len());
    for (i, r) in rows.iter().enumerate() {
        for (j, s) in cols.iter().enumerate() {
            c.push(format!("{kind}[{i}][{j}]"));
            l.push(format!("{r}|{s}"));
        }
    }
    (c, l)
}

fn delta_coords<E: Exposure + Clone>(x: &Experiment<E>) -> (Vec<String>, Vec<String>) {
    let (mut c, mut l) = vector_coords("theta", &x.credit.theta_labels());
    let (c2, l2) = vector_coords("psi", &x.exposure.psi_labels());
    c.extend(c2);
    l.extend(l2);
    (c, l)
}

/// Per-path payoff.
pub fn price<E: Exposure + Clone>(x: &Experiment<E>, cfg: &RunConfig) -> Result<EstimatorRun> {
    let r = run_paths(cfg, 1, |p, out| {
        let mut rng = PathRng::new(cfg.seed, p);
        let (s, path) = x.scenario(&mut rng);
        out[0] = x.payoff(&s, &path);
        Ok(())
    })?;
    Ok(finish("price", cfg, vec!["price".into()], vec!["".into()], r))
}

/// ∂f/∂α + f·∂w/∂α over α = (θ, ψ).
pub fn delta_conditional<E: Exposure + Clone>(x: &Experiment<E>, cfg: &RunConfig) -> Result<EstimatorRun> {
    let dim = x.n_theta() + x.n_psi();
    let r = run_paths(cfg, dim, |p, out| {
        let mut rng = PathRng::new(cfg.seed, p);
        let (s, path) = x.scenario(&mut rng);
        x.conditional(&s, &path, out).map(|_| ())
    })?;
    let (c, l) = delta_coords(x);
    Ok(finish("ad", cfg, c, l, r))
}

struct CumHazard<'a>(&'a HazardCurve, f64);

impl ScalarFn for CumHazard<'_> {
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        self.0.cum_hazard_with(x, S::constant(self.1))
    }
}

fn cum_hazard_gradient(c: &HazardCurve, t: f64) -> Vec<f64> {
    adcore::value_and_gradient(&CumHazard(c, t), c.zeros()).1.entries
}

/// Smooth part through ∂τ/∂θ plus the jump corrections −Σ Δ_k e^{−Λ(T_k)} ∂Λ(T_k)/∂θ.
pub fn delta_distributional<E: Exposure + Clone>(x: &Experiment<E>, cfg: &RunConfig) -> Result<EstimatorRun> {
    if x.exposure.mode() != CvaMode::Unilateral || x.credit.n_names() != 1 {
        return Err(Error::Unsupported(
            "distributional deltas need a single-name unilateral payoff".into(),
        ));
    }
    let curve = &x.credit.curves()[0];
    let mut dates = x.exposure.jump_dates().to_vec();
    dates.push(x.exposure.horizon());
    // e^{−Λ(T_k)} ∂Λ(T_k)/∂θ per jump date
    let jump_sens = dates
        .iter()
        .map(|&t| {
            let s = curve.survival(t)?;
            Ok(cum_hazard_gradient(curve, t)
                .into_iter()
                .map(|g| g * s)
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let n = x.n_theta();
    let r = run_paths(cfg, n, |p, out| {
        let mut rng = PathRng::new(cfg.seed, p);
        let (s, path) = x.scenario(&mut rng);
        if let Some(tau) = s.tau[0] {
            let dg = payoff::loss_time_derivative(&x.exposure, tau, &path);
            if dg != 0.0 {
                let lam = curve.hazard(tau)?;
                for (o, g) in out.iter_mut().zip(cum_hazard_gradient(curve, tau)) {
                    *o -= dg * g / lam;
                }
            }
        }
        for ((_, jump), sens) in payoff::jumps_at(&x.exposure, &path)?.into_iter().zip(&jump_sens) {
            if jump != 0.0 {
                for (o, g) in out.iter_mut().zip(sens) {
                    *o -= jump * g;
                }
            }
        }
        Ok(())
    })?;
    let (c, l) = vector_coords("theta", &x.credit.theta_labels());
    Ok(finish("dist", cfg, c, l, r))
}

/// E[(∂w/∂θ)(∂f/∂ψ)ᵀ], row-major θ × ψ.
pub fn cross_gamma<E: Exposure + Clone>(x: &Experiment<E>, cfg: &RunConfig) -> Result<EstimatorRun> {
    let (nt, np) = (x.n_theta(), x.n_psi());
    let r = run_paths(cfg, nt * np, |p, out| {
        let mut rng = PathRng::new(cfg.seed, p);
        let (s, path) = x.scenario(&mut rng);
        if payoff::trigger_time(x.exposure.mode(), &s).is_none() {
            return Ok(());
        }
        let (_, gpsi) = payoff::value_and_psi_gradient(&x.exposure, &s, &path);
        let w = x.credit.weight(&s, false)?;
        for (i, gt) in w.grad.iter().enumerate() {
            for (o, gp) in out[i * np..(i + 1) * np].iter_mut().zip(&gpsi) {
                *o = gt * gp;
            }
        }
        Ok(())
    })?;
    let (c, l) = matrix_coords("theta_psi", &x.credit.theta_labels(), &x.exposure.psi_labels());
    Ok(finish("ad2_cross", cfg, c, l, r))
}

/// E[f·(∂²w/∂θ² + (∂w/∂θ)(∂w/∂θ)ᵀ)], row-major θ × θ.
pub fn credit_gamma<E: Exposure + Clone>(x: &Experiment<E>, cfg: &RunConfig) -> Result<EstimatorRun> {
    let nt = x.n_theta();
    let r = run_paths(cfg, nt * nt, |p, out| {
        let mut rng = PathRng::new(cfg.seed, p);
        let (s, path) = x.scenario(&mut rng);
        let f = x.payoff(&s, &path);
        if f == 0.0 {
            return Ok(());
        }
        let w = x.credit.weight(&s, true)?;
        let h = w.hess.as_ref().expect("hessian requested");
        for i in 0..nt {
            for j in 0..nt {
                out[i * nt + j] = f * (h.get(i, j) + w.grad[i] * w.grad[j]);
            }
        }
        Ok(())
    })?;
    let labels = x.credit.theta_labels();
    let (c, l) = matrix_coords("theta_theta", &labels, &labels);
    Ok(finish("ad2_credit", cfg, c, l, r))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// (p(x+h) − p(x))/h
    Forward,
    /// (p(x+h) − p(x−h))/2h
    Central,
}

impl Scheme {
    /// Combines bumped values; `base` is unused for central differences.
    pub fn combine(self, up: f64, base: f64, down: f64, h: f64) -> f64 {
        match self {
            Scheme::Forward => (up - base) / h,
            Scheme::Central => (up - down) / (2.0 * h),
        }
    }

    fn offsets(self) -> &'static [f64] {
        match self {
            Scheme::Forward => &[1.0],
            Scheme::Central => &[1.0, -1.0],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BumpTarget {
    Credit,
    Rates,
}

fn bump(v: &[f64], j: usize, h: f64) -> Vec<f64> {
    let mut b = v.to_vec();
    b[j] += h;
    b
}

/// Bumped experiments: for pillar j, entries `[up, down]` (central) or `[up]` (forward).
fn bumped<E: Exposure + Clone>(
    x: &Experiment<E>,
    target: BumpTarget,
    scheme: Scheme,
    h: f64,
) -> Result<Vec<Vec<Experiment<E>>>> {
    let n = match target {
        BumpTarget::Credit => x.n_theta(),
        BumpTarget::Rates => x.n_psi(),
    };
    (0..n)
        .map(|j| {
            scheme
                .offsets()
                .iter()
                .map(|&sgn| {
                    let mut y = x.clone();
                    match target {
                        BumpTarget::Credit => y.credit = x.credit.with_theta(&bump(&x.credit.theta(), j, sgn * h))?,
                        BumpTarget::Rates => y.exposure = x.exposure.with_psi(&bump(x.exposure.psi(), j, sgn * h))?,
                    }
                    Ok(y)
                })
                .collect()
        })
        .collect()
}

fn check_crn(expected: u64, rng: &PathRng) -> Result<()> {
    if rng.draws() != expected {
        return Err(invalid(format!(
            "bumped rerun consumed {} draws, base consumed {expected}",
            rng.draws()
        )));
    }
    Ok(())
}

fn bump_size(bump_bp: f64) -> Result<f64> {
    if !(bump_bp > 0.0) {
        return Err(invalid(format!("bump size {bump_bp}bp must be positive")));
    }
    Ok(bump_bp * 1e-4)
}

fn scheme_tag(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::Forward => "fd",
        Scheme::Central => "cd",
    }
}

/// Bump-and-reprice deltas with common random numbers.
pub fn bump_delta<E: Exposure + Clone>(
    x: &Experiment<E>,
    cfg: &RunConfig,
    scheme: Scheme,
    target: BumpTarget,
    bump_bp: f64,
) -> Result<EstimatorRun> {
    let h = bump_size(bump_bp)?;
    let variants = bumped(x, target, scheme, h)?;
    let r = run_paths(cfg, variants.len(), |p, out| {
        let mut rng = PathRng::new(cfg.seed, p);
        let (s, path) = x.scenario(&mut rng);
        let draws = rng.draws();
        let base = if scheme == Scheme::Forward {
            x.payoff(&s, &path)
        } else {
            0.0
        };
        for (o, vs) in out.iter_mut().zip(&variants) {
            let mut vals = [0.0; 2];
            for (v, y) in vals.iter_mut().zip(vs) {
                let mut rng = PathRng::new(cfg.seed, p);
                let (s, path) = y.scenario(&mut rng);
                check_crn(draws, &rng)?;
                *v = y.payoff(&s, &path);
            }
            *o = scheme.combine(vals[0], base, vals[1], h);
        }
        Ok(())
    })?;
    let (c, l) = match target {
        BumpTarget::Credit => vector_coords("theta", &x.credit.theta_labels()),
        BumpTarget::Rates => vector_coords("psi", &x.exposure.psi_labels()),
    };
    let name = format!("{}{}", scheme_tag(scheme), bump_bp);
    Ok(finish(&name, cfg, c, l, r))
}

/// Differences of the conditional AD gradient under credit bumps.
///
/// Coordinates are θ × ψ (row-major) followed by θ × θ, the layout of
/// [`cross_gamma`] and [`credit_gamma`] concatenated.
pub fn bump_gamma<E: Exposure + Clone>(
    x: &Experiment<E>,
    cfg: &RunConfig,
    scheme: Scheme,
    bump_bp: f64,
) -> Result<EstimatorRun> {
    let h = bump_size(bump_bp)?;
    let variants = bumped(x, BumpTarget::Credit, scheme, h)?;
    let (nt, np) = (x.n_theta(), x.n_psi());
    let na = nt + np;
    let r = run_paths(cfg, nt * np + nt * nt, |p, out| {
        let mut rng = PathRng::new(cfg.seed, p);
        let (s, path) = x.scenario(&mut rng);
        let draws = rng.draws();
        let mut base = vec![0.0; na];
        if scheme == Scheme::Forward {
            x.conditional(&s, &path, &mut base)?;
        }
        let mut g = [vec![0.0; na], vec![0.0; na]];
        for (j, vs) in variants.iter().enumerate() {
            for (gk, y) in g.iter_mut().zip(vs) {
                let mut rng = PathRng::new(cfg.seed, p);
                let (s, path) = y.scenario(&mut rng);
                check_crn(draws, &rng)?;
                y.conditional(&s, &path, gk)?;
            }
            for k in 0..np {
                out[j * np + k] = scheme.combine(g[0][nt + k], base[nt + k], g[1][nt + k], h);
            }
            for i in 0..nt {
                out[nt * np + j * nt + i] = scheme.combine(g[0][i], base[i], g[1][i], h);
            }
        }
        Ok(())
    })?;
    let tl = x.credit.theta_labels();
    let (mut c, mut l) = matrix_coords("theta_psi", &tl, &x.exposure.psi_labels());
    let (c2, l2) = matrix_coords("theta_theta", &tl, &tl);
    c.extend(c2);
    l.extend(l2);
    let name = format!("{}ad{}", scheme_tag(scheme), bump_bp);
    Ok(finish(&name, cfg, c, l, r))
}

/// One repricing point of a finite-difference stencil.
#[derive(Clone, Debug, PartialEq)]
pub struct StencilPoint {
    pub theta: Vec<f64>,
    pub psi: Vec<f64>,
    pub coef: f64,
}

/// Σ coef·f over repriced variants, with common random numbers; one coordinate.
pub fn stencil<E: Exposure + Clone>(
    x: &Experiment<E>,
    cfg: &RunConfig,
    name: &str,
    points: &[StencilPoint],
) -> Result<EstimatorRun> {
    let variants = points
        .iter()
        .map(|pt| {
            Ok(Experiment {
                exposure: x.exposure.with_psi(&pt.psi)?,
                credit: x.credit.with_theta(&pt.theta)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let draws = {
        let mut rng = PathRng::new(cfg.seed, 0);
        x.scenario(&mut rng);
        rng.draws()
    };
    let r = run_paths(cfg, 1, |p, out| {
        for (v, pt) in variants.iter().zip(points) {
            let mut rng = PathRng::new(cfg.seed, p);
            let (s, path) = v.scenario(&mut rng);
            check_crn(draws, &rng)?;
            out[0] += pt.coef * v.payoff(&s, &path);
        }
        Ok(())
    })?;
    Ok(finish(name, cfg, vec![name.to_string()], vec!["".into()], r))
}

/// Constant-hazard toy: f = ψ·I{τ ≤ T} with a one-pillar curve at T.
pub fn toy_experiment(lambda: f64, horizon: f64) -> Result<Experiment<payoff::IndicatorPayoff>> {
    let curve = HazardCurve::flat(lambda, vec![horizon])?;
    Experiment::new(payoff::IndicatorPayoff::new(1.0, horizon), CreditModel::single(curve))
}
