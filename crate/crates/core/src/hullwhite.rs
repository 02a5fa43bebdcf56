//! One-factor Hull-White model in the shifted-factor form r(t) = x(t) + φ(t).
//!
//! φ is fitted so that P(0,T) = D(0,T), which leaves the factor x a driftless
//! Ornstein-Uhlenbeck process started at 0. Paths carry x and its running integral
//! I(t) = ∫₀ᵗ x ds on a fixed grid, both sampled from their exact joint law.

use crate::adcore::Scalar;
use crate::curves::ZeroCurve;
use crate::error::{invalid, Result};
use crate::rng::PathRng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HullWhiteModel {
    pub kappa: f64,
    pub sigma: f64,
}

impl HullWhiteModel {
    pub fn new(kappa: f64, sigma: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(invalid(format!("mean reversion {kappa} must be positive")));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(invalid(format!("volatility {sigma} must be non-negative")));
        }
        Ok(Self { kappa, sigma })
    }

    /// B(d) = (1 − e^{−κd})/κ.
    #[inline]
    pub fn b(&self, d: f64) -> f64 {
        -(-self.kappa * d).exp_m1() / self.kappa
    }

    #[inline]
    fn b_s<S: Scalar>(&self, d: S) -> S {
        (-(d * -self.kappa).exp() + 1.0) / self.kappa
    }

    /// Var x(t+d) given x(t).
    pub fn var_x(&self, d: f64) -> f64 {
        let k = self.kappa;
        self.sigma * self.sigma * (-(-2.0 * k * d).exp_m1()) / (2.0 * k)
    }

    /// Cov(x(t+d), I(t+d) − I(t)) given x(t).
    pub fn cov_xi(&self, d: f64) -> f64 {
        let k = self.kappa;
        let e = (-k * d).exp_m1();
        self.sigma * self.sigma * e * e / (2.0 * k * k)
    }

    /// Var(I(t+d) − I(t)) given x(t).
    pub fn var_i(&self, d: f64) -> f64 {
        let k = self.kappa;
        let s2 = self.sigma * self.sigma;
        if k * d < 1e-3 {
            // series keeps precision on short steps
            let kd = k * d;
            return s2 * d * d * d / 3.0 * (1.0 - 0.75 * kd + 0.35 * kd * kd);
        }
        s2 / (k * k) * (d - 2.0 * self.b(d) + (-(-2.0 * k * d).exp_m1()) / (2.0 * k))
    }

    fn cov(&self, d: f64) -> [f64; 3] {
        [self.var_x(d), self.cov_xi(d), self.var_i(d)]
    }

    /// ∫_a^b of the convexity part of φ: σ²/(2κ²)·∫(1 − e^{−κs})² ds.
    pub fn convexity<S: Scalar>(&self, a: S, b: S) -> S {
        let k = self.kappa;
        let c = self.sigma * self.sigma / (2.0 * k * k);
        let e1 = |t: S| (t * -k).exp();
        let e2 = |t: S| (t * (-2.0 * k)).exp();
        ((b - a) + (e1(b) - e1(a)) * (2.0 / k) - (e2(b) - e2(a)) * (0.5 / k)) * c
    }

    /// P(t,T) with the ZeroCurve pillar rates supplied as `rates`; `d_t` is D(0,t).
    ///
    /// The factor shift σ²/(2κ²)(1 − e^{−κt})² is the covariance of x(t) with I(t).
    pub fn bond_with<S: Scalar>(&self, curve: &ZeroCurve, rates: &[S], t: S, d_t: S, big_t: f64, x: S) -> S {
        let d_big = curve.discount_with(rates, S::constant(big_t));
        let b = self.b_s(-(t - big_t));
        let k = self.kappa;
        let s2 = self.sigma * self.sigma;
        let v = (-((t * (-2.0 * k)).exp()) + 1.0) * (s2 / (4.0 * k));
        let om = -((t * -k).exp()) + 1.0;
        let shift = om * om * (s2 / (2.0 * k * k));
        d_big / d_t * (-(b * (x + shift)) - v * b * b).exp()
    }

    /// Zero-coupon bond price P(t,T) given factor value `x` at t.
    pub fn bond_price(&self, curve: &ZeroCurve, t: f64, big_t: f64, x: f64) -> Result<f64> {
        if !(t >= 0.0) || t > big_t {
            return Err(invalid(format!("bond price needs 0 <= t <= T, got t={t}, T={big_t}")));
        }
        let d_t = curve.discount(t)?;
        Ok(self.bond_with(curve, curve.rates(), t, d_t, big_t, x))
    }

    /// E[(x,I)(τ) | (x,I)(a), (x,I)(b)] for a ≤ τ ≤ b.
    #[allow(clippy::too_many_arguments)]
    pub fn bridge<S: Scalar>(&self, a: f64, b: f64, xa: f64, ia: f64, xb: f64, ib: f64, tau: S) -> (S, S) {
        let k = self.kappa;
        let d1 = tau - a;
        let e1 = (d1 * -k).exp();
        let b1 = self.b_s(d1);
        let mean_x = e1 * xa;
        let mean_i = b1 * xa + ia;
        let delta = b - a;
        if self.sigma == 0.0 || delta <= 0.0 {
            return (mean_x, mean_i);
        }
        let d2 = -(tau - b);
        let (em, bm) = ((d2 * -k).exp(), self.b_s(d2));
        // Σ(d1) with S entries
        let s2 = self.sigma * self.sigma;
        let vx = (-((d1 * (-2.0 * k)).exp()) + 1.0) * (s2 / (2.0 * k));
        let om = -e1 + 1.0;
        let cxi = om * om * (s2 / (2.0 * k * k));
        let vi = var_i_s(self, d1);
        // C = Σ(d1)·Mᵀ with M = [[em, 0], [bm, 1]]
        let c00 = vx * em;
        let c01 = vx * bm + cxi;
        let c10 = cxi * em;
        let c11 = cxi * bm + vi;
        let [zx, zxi, zi] = self.cov(delta);
        let det = zx * zi - zxi * zxi;
        let rx = xb - xa * (-k * delta).exp();
        let ri = ib - ia - xa * self.b(delta);
        // Σ(Δ)⁻¹ r
        let gx = (zi * rx - zxi * ri) / det;
        let gi = (zx * ri - zxi * rx) / det;
        (mean_x + c00 * gx + c01 * gi, mean_i + c10 * gx + c11 * gi)
    }
}

fn var_i_s<S: Scalar>(m: &HullWhiteModel, d: S) -> S {
    let k = m.kappa;
    let s2 = m.sigma * m.sigma;
    let kd = d.value() * k;
    if kd < 1e-3 {
        return d * d * d * (s2 / 3.0) * (-(d * (0.75 * k)) + d * d * (0.35 * k * k) + 1.0);
    }
    let bd = m.b_s(d);
    let b2 = (-((d * (-2.0 * k)).exp()) + 1.0) / (2.0 * k);
    (d - bd * 2.0 + b2) * (s2 / (k * k))
}

/// Simulation times: a regular grid plus every required date, each exactly once.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(mut times: Vec<f64>) -> Result<Self> {
        times.push(0.0);
        times.sort_by(|a, b| a.total_cmp(b));
        times.dedup_by(|a, b| (*a - *b).abs() < 1e-10);
        if times[0] != 0.0 || times.iter().any(|t| !t.is_finite()) {
            return Err(invalid("grid times must be finite and non-negative"));
        }
        Ok(Self { times })
    }

    /// `steps_per_year` regular steps up to `horizon`, merged with `dates` (kept exact).
    pub fn regular(horizon: f64, steps_per_year: usize, dates: &[f64]) -> Result<Self> {
        if !(horizon > 0.0) || steps_per_year == 0 {
            return Err(invalid("grid needs a positive horizon and step count"));
        }
        let n = (horizon * steps_per_year as f64).ceil() as usize;
        let mut times: Vec<f64> = dates.to_vec();
        times.push(horizon);
        for k in 1..=n {
            let t = k as f64 / steps_per_year as f64;
            if t < horizon && !dates.iter().any(|d| (d - t).abs() < 1e-10) {
                times.push(t);
            }
        }
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index `k` with `times[k] <= t < times[k+1]`, clamped to the last interval.
    pub fn interval(&self, t: f64) -> usize {
        let k = self.times.partition_point(|&g| g <= t);
        k.saturating_sub(1).min(self.times.len().saturating_sub(2))
    }

    /// Index of a grid time equal to `t`.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let k = self.times.partition_point(|&g| g < t - 1e-10);
        (k < self.times.len() && (self.times[k] - t).abs() < 1e-10).then_some(k)
    }
}

/// Factor and integrated factor on the grid for one scenario.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RatePath {
    pub x: Vec<f64>,
    pub int: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
struct Step {
    decay: f64,
    b: f64,
    l11: f64,
    l21: f64,
    l22: f64,
}

/// Exact-transition sampler for a fixed grid.
#[derive(Clone, Debug)]
pub struct PathSimulator {
    model: HullWhiteModel,
    grid: TimeGrid,
    steps: Vec<Step>,
}

impl PathSimulator {
    pub fn new(model: HullWhiteModel, grid: TimeGrid) -> Self {
        let steps = grid
            .times()
            .windows(2)
            .map(|w| {
                let d = w[1] - w[0];
                let [vx, c, vi] = model.cov(d);
                let l11 = vx.sqrt();
                let l21 = if l11 > 0.0 { c / l11 } else { 0.0 };
                let l22 = (vi - l21 * l21).max(0.0).sqrt();
                Step {
                    decay: (-model.kappa * d).exp(),
                    b: model.b(d),
                    l11,
                    l21,
                    l22,
                }
            })
            .collect();
        Self { model, grid, steps }
    }

    pub fn model(&self) -> &HullWhiteModel {
        &self.model
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Number of normal draws one path consumes.
    pub fn draws_per_path(&self) -> usize {
        2 * self.steps.len()
    }

    pub fn simulate(&self, rng: &mut PathRng) -> RatePath {
        let n = self.grid.len();
        let mut path = RatePath {
            x: Vec::with_capacity(n),
            int: Vec::with_capacity(n),
        };
        let (mut x, mut i) = (0.0, 0.0);
        path.x.push(x);
        path.int.push(i);
        for s in &self.steps {
            let z1 = rng.normal();
            let z2 = rng.normal();
            let xn = x * s.decay + s.l11 * z1;
            i += x * s.b + s.l21 * z1 + s.l22 * z2;
            x = xn;
            path.x.push(x);
            path.int.push(i);
        }
        path
    }

    /// Bridged (x, I) at any time within the grid.
    pub fn state_at<S: Scalar>(&self, path: &RatePath, tau: S) -> (S, S) {
        let t = self.grid.times();
        let k = self.grid.interval(tau.value());
        self.model.bridge(
            t[k],
            t[k + 1],
            path.x[k],
            path.int[k],
            path.x[k + 1],
            path.int[k + 1],
            tau,
        )
    }
}

/// Paths for many scenarios on one grid.
#[derive(Clone, Debug)]
pub struct RateGrid {
    pub times: Vec<f64>,
    pub paths: Vec<RatePath>,
}

/// Simulates `n_paths` scenarios; path `p` uses stream `(seed, p)`.
pub fn simulate_paths(model: &HullWhiteModel, grid: &TimeGrid, n_paths: usize, seed: u64) -> Result<RateGrid> {
    if n_paths == 0 {
        return Err(invalid("n_paths must be at least 1"));
    }
    let sim = PathSimulator::new(*model, grid.clone());
    let paths = (0..n_paths)
        .map(|p| sim.simulate(&mut PathRng::new(seed, p as u64)))
        .collect();
    Ok(RateGrid {
        times: grid.times().to_vec(),
        paths,
    })
}

/// Which side of a payment date an evaluation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Flow at the evaluation date not yet paid.
    Before,
    /// Flow at the evaluation date already paid.
    After,
}

/// Fixed-vs-compounded-overnight swap with annual periods.
#[derive(Clone, Debug, PartialEq)]
pub struct SwapSpec {
    pub notional: f64,
    pub fixed_rate: f64,
    pub maturity_years: u32,
    pub receive_fixed: bool,
}

impl SwapSpec {
    pub fn payment_dates(&self) -> Vec<f64> {
        (1..=self.maturity_years).map(f64::from).collect()
    }

    pub fn maturity(&self) -> f64 {
        f64::from(self.maturity_years)
    }

    /// Cash exchanged at payment date `k` (1-based) given the period growth factor.
    pub fn net_flow(&self, growth: f64) -> f64 {
        let sign = if self.receive_fixed { 1.0 } else { -1.0 };
        sign * self.notional * (self.fixed_rate - (growth - 1.0))
    }

    /// Fixed rate that sets the time-0 value to zero on `curve`.
    pub fn par_rate(&self, curve: &ZeroCurve) -> Result<f64> {
        let dates = self.payment_dates();
        let mut annuity = 0.0;
        let mut prev = 0.0;
        for &d in &dates {
            annuity += (d - prev) * curve.discount(d)?;
            prev = d;
        }
        Ok((1.0 - curve.discount(self.maturity())?) / annuity)
    }
}

/// Swap valuation on simulated paths, generic in the curve pillars and in time.
#[derive(Clone, Debug)]
pub struct SwapPricer {
    pub model: HullWhiteModel,
    pub curve: ZeroCurve,
    pub swap: SwapSpec,
    dates: Vec<f64>,
}

impl SwapPricer {
    pub fn new(model: HullWhiteModel, curve: ZeroCurve, swap: SwapSpec) -> Result<Self> {
        if swap.maturity_years == 0 || !(swap.notional.is_finite()) {
            return Err(invalid("swap needs a positive maturity and finite notional"));
        }
        let dates = swap.payment_dates();
        Ok(Self {
            model,
            curve,
            swap,
            dates,
        })
    }

    pub fn payment_dates(&self) -> &[f64] {
        &self.dates
    }

    /// Index of the first payment still outstanding at `t` on the given side.
    fn first_outstanding(&self, t: f64, side: Side) -> usize {
        match side {
            Side::Before => self.dates.partition_point(|&d| d < t),
            Side::After => self.dates.partition_point(|&d| d <= t),
        }
    }

    /// NPV at `t` given factor `x`, integrated factor `int` at t, and the integrated
    /// factor `int_anchor` at the start of the running period.
    #[allow(clippy::too_many_arguments)]
    pub fn npv_with<S: Scalar>(&self, rates: &[S], t: S, x: S, int: S, int_anchor: f64, side: Side) -> S {
        let tv = t.value();
        let first = self.first_outstanding(tv, side);
        if first >= self.dates.len() {
            return S::zero();
        }
        let n = self.swap.notional;
        let d_t = self.curve.discount_with(rates, t);
        let mut fixed = S::zero();
        let mut prev = if first == 0 { 0.0 } else { self.dates[first - 1] };
        let anchor = prev;
        let mut last_bond = S::zero();
        for &d in &self.dates[first..] {
            last_bond = self.model.bond_with(&self.curve, rates, t, d_t, d, x);
            fixed = fixed + last_bond * ((d - prev) * n * self.swap.fixed_rate);
            prev = d;
        }
        let d_anchor = self.curve.discount_with(rates, S::constant(anchor));
        let growth = d_anchor / d_t * (int - int_anchor + self.model.convexity(S::constant(anchor), t)).exp();
        let floating = (growth - last_bond) * n;
        let v = fixed - floating;
        if self.swap.receive_fixed {
            v
        } else {
            -v
        }
    }

    /// Integrated factor at the start of the period running at `t`.
    pub fn anchor_integral(&self, sim: &PathSimulator, path: &RatePath, t: f64, side: Side) -> f64 {
        let first = self.first_outstanding(t, side);
        if first == 0 {
            return 0.0;
        }
        let a = self.dates[first - 1];
        let k = sim.grid().index_of(a).expect("payment dates lie on the grid");
        path.int[k]
    }

    /// NPV on a simulated path at any time up to maturity, bridging between grid points.
    pub fn npv_on_path<S: Scalar>(&self, sim: &PathSimulator, rates: &[S], path: &RatePath, t: S, side: Side) -> S {
        let (x, int) = sim.state_at(path, t);
        let anchor = self.anchor_integral(sim, path, t.value(), side);
        self.npv_with(rates, t, x, int, anchor, side)
    }

    /// Plain NPV at `t` on a given state.
    pub fn swap_npv(&self, t: f64, x: f64, int: f64, int_anchor: f64, side: Side) -> Result<f64> {
        if !(t >= 0.0) || t > self.swap.maturity() {
            return Err(invalid(format!("swap valuation time {t} outside [0, maturity]")));
        }
        Ok(self.npv_with(self.curve.rates(), t, x, int, int_anchor, side))
    }
}
