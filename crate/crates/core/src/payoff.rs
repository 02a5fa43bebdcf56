//! CVA integrands.
//!
//! A payoff is split into an exposure g(ψ; τ, X), the discounted loss if the
//! counterparty defaults at τ, and a default indicator that depends on the credit
//! sample only. The exposure never sees θ.

use crate::adcore::{self, Dual, Scalar, ScalarFn};
use crate::credit::DefaultSample;
use crate::error::{invalid, Error, Result};
use crate::hullwhite::{PathSimulator, RatePath, Side, SwapPricer, TimeGrid};
use crate::rng::PathRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CvaMode {
    /// Loss when name 1 defaults before T; own default ignored.
    Unilateral,
    /// Loss when name 1 defaults before both T and name 2.
    Bilateral,
}

/// How the loss at τ is discounted back to today.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Discounting {
    /// exp(−∫₀^τ r) on the simulated short rate, consistent with the exposure.
    #[default]
    Pathwise,
    /// D(0,τ) off the zero curve; rates stay stochastic inside the NPV only.
    Deterministic,
}

/// Discounted loss on default, as a function of the rate pillars ψ and the default time.
pub trait Exposure: Sync + Sized {
    type Path: Send + Sync;

    fn psi(&self) -> &[f64];
    fn psi_labels(&self) -> Vec<String>;
    /// Portfolio maturity T; defaults are censored there.
    fn horizon(&self) -> f64;
    fn mode(&self) -> CvaMode;
    fn simulate(&self, rng: &mut PathRng) -> Self::Path;
    /// Loss if default happens at `tau`, before applying the indicator.
    fn loss_at<S: Scalar>(&self, psi: &[S], tau: S, path: &Self::Path, side: Side) -> S;
    /// Dates strictly before the horizon where the loss jumps in τ.
    fn jump_dates(&self) -> &[f64];
    fn with_psi(&self, psi: &[f64]) -> Result<Self>;
}

/// Default time of the reference name if the payoff is live on this sample.
pub fn trigger_time(mode: CvaMode, s: &DefaultSample) -> Option<f64> {
    let t1 = s.tau[0]?;
    match mode {
        CvaMode::Unilateral => Some(t1),
        CvaMode::Bilateral => match s.tau.get(1).copied().flatten() {
            Some(t2) if t2 < t1 => None,
            _ => Some(t1),
        },
    }
}

/// f(ψ) on one scenario; zero without evaluating the exposure when the indicator is off.
pub fn evaluate<E: Exposure, S: Scalar>(e: &E, psi: &[S], s: &DefaultSample, path: &E::Path) -> S {
    match trigger_time(e.mode(), s) {
        Some(t) => e.loss_at(psi, S::constant(t), path, Side::After),
        None => S::zero(),
    }
}

struct PayoffFn<'a, E: Exposure> {
    e: &'a E,
    s: &'a DefaultSample,
    path: &'a E::Path,
}

impl<E: Exposure> ScalarFn for PayoffFn<'_, E> {
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        evaluate(self.e, x, self.s, self.path)
    }
}

/// f and ∂f/∂ψ by one reverse sweep.
pub fn value_and_psi_gradient<E: Exposure>(e: &E, s: &DefaultSample, path: &E::Path) -> (f64, Vec<f64>) {
    if trigger_time(e.mode(), s).is_none() {
        return (0.0, vec![0.0; e.psi().len()]);
    }
    let (v, g) = adcore::value_and_gradient(&PayoffFn { e, s, path }, e.psi());
    (v, g.entries)
}

/// ∂g/∂τ at a default time off the payment dates.
pub fn loss_time_derivative<E: Exposure>(e: &E, tau: f64, path: &E::Path) -> f64 {
    let psi: Vec<Dual> = e.psi().iter().map(|&r| Dual::constant(r)).collect();
    e.loss_at(&psi, Dual::new(tau, 1.0), path, Side::After).d
}

/// Jumps Δ_k = f(T_k+) − f(T_k−) of the payoff as a function of τ, horizon last.
///
/// At the horizon the indicator switches off, so the jump there is −g(T−).
pub fn jumps_at<E: Exposure>(e: &E, path: &E::Path) -> Result<Vec<(f64, f64)>> {
    if e.mode() != CvaMode::Unilateral {
        return Err(Error::Unsupported(
            "payoff jumps are defined for unilateral CVA only".into(),
        ));
    }
    let psi = e.psi();
    let mut out: Vec<(f64, f64)> = e
        .jump_dates()
        .iter()
        .map(|&t| {
            let after: f64 = e.loss_at(psi, t, path, Side::After);
            let before: f64 = e.loss_at(psi, t, path, Side::Before);
            (t, after - before)
        })
        .collect();
    let t = e.horizon();
    out.push((t, -e.loss_at(psi, t, path, Side::Before)));
    Ok(out)
}

/// CVA on a single swap under Hull-White rates.
#[derive(Clone, Debug)]
pub struct CvaPayoff {
    pub lgd: f64,
    pub mode: CvaMode,
    pub discounting: Discounting,
    pricer: SwapPricer,
    sim: PathSimulator,
    interior: Vec<f64>,
}

impl CvaPayoff {
    /// `steps_per_year` sets the regular part of the simulation grid.
    pub fn new(pricer: SwapPricer, lgd: f64, mode: CvaMode, steps_per_year: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&lgd) {
            return Err(invalid(format!("lgd {lgd} outside [0,1]")));
        }
        let dates = pricer.payment_dates().to_vec();
        let grid = TimeGrid::regular(pricer.swap.maturity(), steps_per_year, &dates)?;
        let sim = PathSimulator::new(pricer.model, grid);
        let t = pricer.swap.maturity();
        let interior = dates.into_iter().filter(|&d| d < t).collect();
        Ok(Self {
            lgd,
            mode,
            discounting: Discounting::default(),
            pricer,
            sim,
            interior,
        })
    }

    pub fn with_discounting(mut self, d: Discounting) -> Self {
        self.discounting = d;
        self
    }

    pub fn pricer(&self) -> &SwapPricer {
        &self.pricer
    }

    pub fn simulator(&self) -> &PathSimulator {
        &self.sim
    }
}

impl Exposure for CvaPayoff {
    type Path = RatePath;

    fn psi(&self) -> &[f64] {
        self.pricer.curve.rates()
    }

    fn psi_labels(&self) -> Vec<String> {
        self.pricer.curve.labels().to_vec()
    }

    fn horizon(&self) -> f64 {
        self.pricer.swap.maturity()
    }

    fn mode(&self) -> CvaMode {
        self.mode
    }

    fn simulate(&self, rng: &mut PathRng) -> RatePath {
        self.sim.simulate(rng)
    }

    fn loss_at<S: Scalar>(&self, psi: &[S], tau: S, path: &RatePath, side: Side) -> S {
        if self.lgd == 0.0 {
            return S::zero();
        }
        let (x, int) = self.sim.state_at(path, tau);
        let anchor = self.pricer.anchor_integral(&self.sim, path, tau.value(), side);
        let npv = self.pricer.npv_with(psi, tau, x, int, anchor, side);
        let mut df = self.pricer.curve.discount_with(psi, tau);
        if self.discounting == Discounting::Pathwise {
            df = df * (-int - self.pricer.model.convexity(S::zero(), tau)).exp();
        }
        -(df * npv.pos()) * self.lgd
    }

    fn jump_dates(&self) -> &[f64] {
        &self.interior
    }

    fn with_psi(&self, psi: &[f64]) -> Result<Self> {
        let mut out = self.clone();
        out.pricer.curve = self.pricer.curve.with_rates(psi)?;
        Ok(out)
    }
}

/// Toy payoff f = ψ·I{τ ≤ T}: constant loss, no rate dependence beyond ψ itself.
#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorPayoff {
    psi: [f64; 1],
    horizon: f64,
}

impl IndicatorPayoff {
    pub fn new(scale: f64, horizon: f64) -> Self {
        Self { psi: [scale], horizon }
    }
}

impl Exposure for IndicatorPayoff {
    type Path = ();

    fn psi(&self) -> &[f64] {
        &self.psi
    }

    fn psi_labels(&self) -> Vec<String> {
        vec!["scale".into()]
    }

    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn mode(&self) -> CvaMode {
        CvaMode::Unilateral
    }

    fn simulate(&self, _: &mut PathRng) {}

    fn loss_at<S: Scalar>(&self, psi: &[S], _: S, _: &(), _: Side) -> S {
        psi[0]
    }

    fn jump_dates(&self) -> &[f64] {
        &[]
    }

    fn with_psi(&self, psi: &[f64]) -> Result<Self> {
        match psi {
            [s] => Ok(Self::new(*s, self.horizon)),
            _ => Err(invalid("indicator payoff has one parameter")),
        }
    }
}
