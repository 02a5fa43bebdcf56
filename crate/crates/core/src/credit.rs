//! Default times and their conditional log-density weights.
//!
//! A name defaults at τ = Λ⁻¹(ε) for a unit exponential trigger ε, and only when
//! ε ≤ Λ(T); survivors past the horizon keep their trigger but no default time.
//! Weights w are log-densities of the simulated default information, written
//! generically in the credit parameters θ so that their gradient and Hessian come
//! from the adjoint engine.

use std::collections::HashMap;

use crate::adcore::{self, Scalar, ScalarFn, SmallHessian};
use crate::curves::HazardCurve;
use crate::error::{invalid, Error, Result};
use crate::normal;
use crate::rng::PathRng;

/// Default information for one scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct DefaultSample {
    /// Exponential triggers ε_i.
    pub eps: Vec<f64>,
    /// Grades u_i = 1 − e^{−ε_i}, kept for survivors too.
    pub u: Vec<f64>,
    /// Default times, `None` for names surviving past the horizon.
    pub tau: Vec<Option<f64>>,
    pub horizon: f64,
}

impl DefaultSample {
    pub fn defaulted(&self, i: usize) -> bool {
        self.tau[i].is_some()
    }

    /// Bit `i` set when name `i` defaulted.
    pub fn defaulted_set(&self) -> u32 {
        self.tau
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_some())
            .fold(0, |m, (i, _)| m | (1 << i))
    }

    /// Truncated time τ_i ∧ T.
    pub fn time_or_horizon(&self, i: usize) -> f64 {
        self.tau[i].unwrap_or(self.horizon)
    }
}

fn censor(curve: &HazardCurve, horizon: f64, eps: f64) -> Option<f64> {
    let cap = curve.cum_hazard_with(curve.zeros(), horizon);
    (eps <= cap).then(|| curve.inverse(eps).min(horizon))
}

/// Single name from a uniform draw u ∈ (0,1).
pub fn sample_default(curve: &HazardCurve, horizon: f64, u: f64) -> DefaultSample {
    let eps = -(-u).ln_1p();
    DefaultSample {
        eps: vec![eps],
        u: vec![u],
        tau: vec![censor(curve, horizon, eps)],
        horizon,
    }
}

/// Two names coupled by a Gaussian copula, from independent standard normals.
pub fn sample_default_pair(
    curves: [&HazardCurve; 2],
    horizon: f64,
    copula: &GaussianCopula2,
    z1: f64,
    z2: f64,
) -> DefaultSample {
    let rho = copula.rho;
    let y = [z1, rho * z1 + (1.0 - rho * rho).sqrt() * z2];
    let mut s = DefaultSample {
        eps: Vec::with_capacity(2),
        u: Vec::with_capacity(2),
        tau: Vec::with_capacity(2),
        horizon,
    };
    for (c, y) in curves.iter().zip(y) {
        // 1 − u = Φ(−y) keeps precision in the upper tail
        let eps = -normal::cdf(-y).ln();
        s.eps.push(eps);
        s.u.push(normal::cdf(y));
        s.tau.push(censor(c, horizon, eps));
    }
    s
}

/// Bivariate Gaussian copula with correlation ρ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianCopula2 {
    pub rho: f64,
}

impl GaussianCopula2 {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho.abs() < 1.0) {
            return Err(invalid(format!("copula correlation {rho} outside (-1,1)")));
        }
        Ok(Self { rho })
    }

    /// log c in terms of the normal scores y_i = Φ⁻¹(u_i).
    pub fn log_density_scores<S: Scalar>(&self, y1: S, y2: S) -> S {
        let r = self.rho;
        let q = 1.0 - r * r;
        -((y1 * y1 + y2 * y2) * (r * r / q) - y1 * y2 * (2.0 * r / q) + q.ln()) * 0.5
    }

    pub fn log_density(&self, u1: f64, u2: f64) -> f64 {
        self.log_density_scores(normal::inv_cdf(u1), normal::inv_cdf(u2))
    }

    /// ∂log c/∂u_i·(1 − u_i), i = 1, 2.
    pub fn d_constants(&self, u1: f64, u2: f64) -> [f64; 2] {
        let r = self.rho;
        let q = 1.0 - r * r;
        let y1 = normal::inv_cdf(u1);
        let y2 = normal::inv_cdf(u2);
        let g1 = -(r * r * y1 - r * y2) / q;
        let g2 = -(r * r * y2 - r * y1) / q;
        [g1 * (1.0 - u1) / normal::pdf(y1), g2 * (1.0 - u2) / normal::pdf(y2)]
    }

    /// P(U₂ > u₂ | U₁ = u₁).
    pub fn conditional_tail(&self, u2: f64, u1: f64) -> f64 {
        let s = (1.0 - self.rho * self.rho).sqrt();
        1.0 - normal::cdf((normal::inv_cdf(u2) - self.rho * normal::inv_cdf(u1)) / s)
    }

    /// C(u₁, u₂) = P(U₁ ≤ u₁, U₂ ≤ u₂).
    pub fn cdf(&self, u1: f64, u2: f64) -> f64 {
        normal::bvn_cdf(normal::inv_cdf(u1), normal::inv_cdf(u2), self.rho)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Dependence {
    Independent,
    Gaussian(GaussianCopula2),
}

/// How the pair weight treats names that survive the horizon.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightScheme {
    /// Censored intensity: survivors keep their grade; copula constants frozen.
    Censored,
    /// Restriction of the copula to the defaulted names; survivors enter through
    /// conditional tails. Regions where name 1 survives are left unused.
    SurvivorFree,
    /// Survivor-free density on every region (the full censored likelihood).
    SurvivorFreeFull,
}

/// Weight value with its θ-derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct CreditWeight {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Option<SmallHessian>,
    /// The estimator term is zero on this region; no weight was evaluated.
    pub unused: bool,
}

impl CreditWeight {
    fn unused(n: usize) -> Self {
        Self {
            value: 0.0,
            grad: vec![0.0; n],
            hess: None,
            unused: true,
        }
    }
}

/// Default model for one or more names.
#[derive(Clone, Debug, PartialEq)]
pub struct CreditModel {
    curves: Vec<HazardCurve>,
    dependence: Dependence,
    scheme: WeightScheme,
    offsets: Vec<usize>,
}

impl CreditModel {
    pub fn new(curves: Vec<HazardCurve>, dependence: Dependence, scheme: WeightScheme) -> Result<Self> {
        if curves.is_empty() {
            return Err(invalid("credit model needs at least one name"));
        }
        if matches!(dependence, Dependence::Gaussian(_)) && curves.len() != 2 {
            return Err(Error::Unsupported(format!(
                "gaussian copula is implemented for exactly two names, got {}",
                curves.len()
            )));
        }
        if scheme != WeightScheme::Censored && curves.len() != 2 {
            return Err(Error::Unsupported(
                "survivor-free weights need exactly two names".into(),
            ));
        }
        let mut offsets = vec![0];
        for c in &curves {
            offsets.push(offsets.last().unwrap() + c.len());
        }
        Ok(Self {
            curves,
            dependence,
            scheme,
            offsets,
        })
    }

    pub fn single(curve: HazardCurve) -> Self {
        Self::new(vec![curve], Dependence::Independent, WeightScheme::Censored).expect("one name is valid")
    }

    pub fn curves(&self) -> &[HazardCurve] {
        &self.curves
    }

    pub fn dependence(&self) -> Dependence {
        self.dependence
    }

    pub fn scheme(&self) -> WeightScheme {
        self.scheme
    }

    pub fn n_names(&self) -> usize {
        self.curves.len()
    }

    pub fn n_theta(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Concatenated zero intensities of all names.
    pub fn theta(&self) -> Vec<f64> {
        self.curves.iter().flat_map(|c| c.zeros().iter().copied()).collect()
    }

    pub fn theta_labels(&self) -> Vec<String> {
        let multi = self.curves.len() > 1;
        self.curves
            .iter()
            .enumerate()
            .flat_map(|(i, c)| {
                c.labels()
                    .iter()
                    .map(move |l| if multi { format!("{}:{l}", i + 1) } else { l.clone() })
            })
            .collect()
    }

    /// Range of θ belonging to name `i`.
    pub fn block(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn with_theta(&self, theta: &[f64]) -> Result<Self> {
        if theta.len() != self.n_theta() {
            return Err(invalid(format!(
                "θ has {} entries, model needs {}",
                theta.len(),
                self.n_theta()
            )));
        }
        let curves = self
            .curves
            .iter()
            .enumerate()
            .map(|(i, c)| c.with_zeros(&theta[self.block(i)]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(curves, self.dependence, self.scheme)
    }

    pub fn with_scheme(&self, scheme: WeightScheme) -> Result<Self> {
        Self::new(self.curves.clone(), self.dependence, scheme)
    }

    /// Draws default information: one uniform per name, or two normals for the copula.
    pub fn sample(&self, rng: &mut PathRng, horizon: f64) -> DefaultSample {
        match self.dependence {
            Dependence::Independent => {
                let mut s = DefaultSample {
                    eps: Vec::new(),
                    u: Vec::new(),
                    tau: Vec::new(),
                    horizon,
                };
                for c in &self.curves {
                    let one = sample_default(c, horizon, rng.uniform());
                    s.eps.push(one.eps[0]);
                    s.u.push(one.u[0]);
                    s.tau.push(one.tau[0]);
                }
                s
            }
            Dependence::Gaussian(cop) => {
                let z1 = rng.normal();
                let z2 = rng.normal();
                sample_default_pair([&self.curves[0], &self.curves[1]], horizon, &cop, z1, z2)
            }
        }
    }

    fn lambda<S: Scalar>(&self, theta: &[S], i: usize, t: S) -> S {
        self.curves[i].cum_hazard_with(&theta[self.block(i)], t)
    }

    fn hazard<S: Scalar>(&self, theta: &[S], i: usize, t: f64) -> S {
        self.curves[i].hazard_with(&theta[self.block(i)], t)
    }

    /// −Λ(τ) + log λ(τ) for a defaulted name, −Λ(T) for a survivor.
    fn marginal<S: Scalar>(&self, theta: &[S], s: &DefaultSample, i: usize) -> S {
        match s.tau[i] {
            Some(t) => -self.lambda(theta, i, S::constant(t)) + self.hazard(theta, i, t).ln(),
            None => -self.lambda(theta, i, S::constant(s.horizon)),
        }
    }

    /// Normal score Φ⁻¹(1 − e^{−Λ̃}) computed from the survival side.
    fn score<S: Scalar>(cum: S) -> S {
        -((-cum).exp().norm_inv())
    }

    /// Censored-intensity weight with the copula term differentiated in full.
    ///
    /// A survivor's cumulative hazard is continued past T by a θ-free amount so that
    /// its value equals the sampled trigger; this is a genuine log-density in θ and
    /// its gradient coincides with the frozen-constant form.
    fn censored_true<S: Scalar>(&self, theta: &[S], s: &DefaultSample, cop: &GaussianCopula2) -> S {
        let mut ys = [S::zero(); 2];
        let mut w = S::zero();
        for (i, y) in ys.iter_mut().enumerate() {
            let t = s.time_or_horizon(i);
            let mut cum = self.lambda(theta, i, S::constant(t));
            if s.tau[i].is_none() {
                let base = self.curves[i].cum_hazard_with(self.curves[i].zeros(), t);
                cum = cum + (s.eps[i] - base);
            } else {
                w = w + self.hazard(theta, i, t).ln();
            }
            w = w - cum;
            *y = Self::score(cum);
        }
        w + cop.log_density_scores(ys[0], ys[1])
    }

    /// Frozen-constant form log c(u) + Σ[(d_i − 1)Λ_i(τ_i∧T) + I·log λ_i(τ_i)].
    fn censored_frozen<S: Scalar>(&self, theta: &[S], s: &DefaultSample, cop: &GaussianCopula2) -> S {
        let d = cop.d_constants(s.u[0], s.u[1]);
        let mut w = S::constant(cop.log_density(s.u[0], s.u[1]));
        for (i, di) in d.iter().enumerate() {
            let t = s.time_or_horizon(i);
            w = w + self.lambda(theta, i, S::constant(t)) * (di - 1.0);
            if s.tau[i].is_some() {
                w = w + self.hazard(theta, i, t).ln();
            }
        }
        w
    }

    /// Survivor-free density on the region given by the defaulted set.
    fn survivor_free<S: Scalar>(&self, theta: &[S], s: &DefaultSample, cop: &GaussianCopula2) -> S {
        let rho = cop.rho;
        let sq = (1.0 - rho * rho).sqrt();
        let cums: Vec<S> = (0..2)
            .map(|i| self.lambda(theta, i, S::constant(s.time_or_horizon(i))))
            .collect();
        let ys: Vec<S> = cums.iter().map(|&c| Self::score(c)).collect();
        match (s.defaulted(0), s.defaulted(1)) {
            (true, true) => {
                self.marginal(theta, s, 0) + self.marginal(theta, s, 1) + cop.log_density_scores(ys[0], ys[1])
            }
            (true, false) | (false, true) => {
                let (d, v) = if s.defaulted(0) { (0, 1) } else { (1, 0) };
                // P(Y_v > a_v | Y_d = y_d)
                let tail = (-((ys[v] - ys[d] * rho) / sq)).norm_cdf();
                self.marginal(theta, s, d) + tail.ln()
            }
            (false, false) => S::bvn_cdf(-ys[0], -ys[1], rho).ln(),
        }
    }

    /// Log-weight w(θ), or `None` where the estimator leaves it unused.
    pub fn log_weight<S: Scalar>(&self, theta: &[S], s: &DefaultSample) -> Option<S> {
        match (self.dependence, self.scheme) {
            (Dependence::Independent, WeightScheme::Censored) => {
                Some((0..self.curves.len()).fold(S::zero(), |w, i| w + self.marginal(theta, s, i)))
            }
            (Dependence::Gaussian(c), WeightScheme::Censored) => Some(self.censored_frozen(theta, s, &c)),
            (dep, scheme) => {
                let cop = match dep {
                    Dependence::Gaussian(c) => c,
                    Dependence::Independent => GaussianCopula2 { rho: 0.0 },
                };
                if scheme == WeightScheme::SurvivorFree && !s.defaulted(0) {
                    return None;
                }
                Some(self.survivor_free(theta, s, &cop))
            }
        }
    }

    /// Full log-density in θ at a fixed sample: the weight whose Hessian is valid.
    ///
    /// Differs from [`Self::log_weight`] only by a θ-free constant in value and not
    /// at all in gradient.
    pub fn log_density<S: Scalar>(&self, theta: &[S], s: &DefaultSample) -> Option<S> {
        match (self.dependence, self.scheme) {
            (Dependence::Gaussian(c), WeightScheme::Censored) => Some(self.censored_true(theta, s, &c)),
            _ => self.log_weight(theta, s),
        }
    }

    /// Evaluates w, ∂w/∂θ and, when `hessian` is set, ∂²w/∂θ².
    pub fn weight(&self, s: &DefaultSample, hessian: bool) -> Result<CreditWeight> {
        let n = self.n_theta();
        let theta = self.theta();
        if self.log_weight::<f64>(&theta, s).is_none() {
            return Ok(CreditWeight::unused(n));
        }
        let first = WeightFn {
            model: self,
            sample: s,
            second: false,
        };
        let (value, grad) = adcore::value_and_gradient(&first, &theta);
        if !value.is_finite() {
            return Err(invalid(format!("weight is not finite ({value}) on sample {s:?}")));
        }
        let hess = if hessian {
            let second = WeightFn {
                model: self,
                sample: s,
                second: true,
            };
            Some(adcore::small_hessian(&second, &theta)?)
        } else {
            None
        };
        Ok(CreditWeight {
            value,
            grad: grad.entries,
            hess,
            unused: false,
        })
    }
}

struct WeightFn<'a> {
    model: &'a CreditModel,
    sample: &'a DefaultSample,
    second: bool,
}

impl ScalarFn for WeightFn<'_> {
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let w = if self.second {
            self.model.log_density(x, self.sample)
        } else {
            self.model.log_weight(x, self.sample)
        };
        w.unwrap_or_else(S::zero)
    }
}

/// Single-name censored weight I{τ≤T}[−Λ(τ) + log λ(τ)] − I{τ>T}Λ(T).
pub fn weight_single_censored(curve: &HazardCurve, sample: &DefaultSample) -> Result<CreditWeight> {
    CreditModel::single(curve.clone()).weight(sample, true)
}

/// Pair weight with censored intensities and frozen copula constants.
pub fn weight_pair_copula(
    curves: [&HazardCurve; 2],
    sample: &DefaultSample,
    copula: &GaussianCopula2,
) -> Result<CreditWeight> {
    let m = CreditModel::new(
        vec![curves[0].clone(), curves[1].clone()],
        Dependence::Gaussian(*copula),
        WeightScheme::Censored,
    )?;
    m.weight(sample, true)
}

/// Pair weight restricted to the defaulted names; unused where name 1 survives.
pub fn weight_pair_survivor_free(
    curves: [&HazardCurve; 2],
    sample: &DefaultSample,
    copula: &GaussianCopula2,
) -> Result<CreditWeight> {
    let m = CreditModel::new(
        vec![curves[0].clone(), curves[1].clone()],
        Dependence::Gaussian(*copula),
        WeightScheme::SurvivorFree,
    )?;
    m.weight(sample, true)
}

fn subset_name(mask: u32, n: usize) -> String {
    let names: Vec<String> = (0..n)
        .filter(|i| mask & (1 << i) != 0)
        .map(|i| (i + 1).to_string())
        .collect();
    format!("{{{}}}", names.join(","))
}

/// Inclusion-exclusion addends f_I^{(|I|−1)} = Σ_{J⊆I} (−1)^{|I∖J|} f_J, indexed by bitmask.
pub fn decompose_payoff(n_names: usize, f: &HashMap<u32, f64>) -> Result<Vec<f64>> {
    if n_names > 3 {
        return Err(Error::Unsupported(format!(
            "decomposition over {n_names} names (at most 3)"
        )));
    }
    let full = 1u32 << n_names;
    let mut vals = Vec::with_capacity(full as usize);
    for m in 0..full {
        let v = f
            .get(&m)
            .ok_or_else(|| invalid(format!("missing payoff for subset {}", subset_name(m, n_names))))?;
        vals.push(*v);
    }
    Ok((0..full)
        .map(|i| {
            let mut sum = 0.0;
            let mut j = i;
            loop {
                let sign = if (i ^ j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                sum += sign * vals[j as usize];
                if j == 0 {
                    break;
                }
                j = (j - 1) & i;
            }
            sum
        })
        .collect())
}

/// Σ over subsets I of the defaulted set K of the addends; equals f_K.
pub fn reconstruct(addends: &[f64], region: u32) -> f64 {
    let mut sum = 0.0;
    let mut j = region;
    loop {
        sum += addends[j as usize];
        if j == 0 {
            break;
        }
        j = (j - 1) & region;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(l: f64) -> HazardCurve {
        HazardCurve::flat(l, vec![5.0, 10.0, 20.0]).unwrap()
    }

    #[test]
    fn constant_hazard_inversion() {
        let s = sample_default(&flat(0.02), 10.0, 0.5);
        assert!(s.tau[0].is_none());
        assert!((s.eps[0] - 2f64.ln()).abs() < 1e-15);
        let s = sample_default(&flat(0.2), 10.0, 0.5);
        assert!((s.tau[0].unwrap() - 2f64.ln() / 0.2).abs() < 1e-12);
    }

    #[test]
    fn boundary_defaults() {
        let c = flat(0.05);
        let u = -(-0.5f64).exp_m1();
        // ε = Λ(T) exactly (up to rounding) sits on the closed side
        let s = sample_default(&c, 10.0, u);
        assert_eq!(s.defaulted(0), s.eps[0] <= 0.5);
    }

    #[test]
    fn single_weight_values() {
        let c = HazardCurve::flat(0.02, vec![20.0]).unwrap();
        let s = DefaultSample {
            eps: vec![0.06],
            u: vec![-(-0.06f64).exp_m1()],
            tau: vec![Some(3.0)],
            horizon: 10.0,
        };
        let w = weight_single_censored(&c, &s).unwrap();
        assert!((w.value - (-0.06 + 0.02f64.ln())).abs() < 1e-14);
        assert!((w.value + 3.9720).abs() < 1e-4);
        assert!((w.grad[0] - 47.0).abs() < 1e-10);
        assert!((w.hess.unwrap().get(0, 0) + 2500.0).abs() < 1e-8);
        let s = DefaultSample {
            eps: vec![1.0],
            u: vec![-(-1f64).exp_m1()],
            tau: vec![None],
            horizon: 10.0,
        };
        let w = weight_single_censored(&c, &s).unwrap();
        assert!((w.value + 0.2).abs() < 1e-15);
        assert!((w.grad[0] + 10.0).abs() < 1e-12);
    }

    #[test]
    fn frozen_and_true_forms_share_gradient() {
        let a = HazardCurve::new(vec![2.0, 5.0, 10.0], vec![0.03, 0.04, 0.045]).unwrap();
        let b = HazardCurve::new(vec![3.0, 10.0], vec![0.05, 0.06]).unwrap();
        let cop = GaussianCopula2::new(0.5).unwrap();
        let m = CreditModel::new(
            vec![a.clone(), b.clone()],
            Dependence::Gaussian(cop),
            WeightScheme::Censored,
        )
        .unwrap();
        let theta = m.theta();
        for (z1, z2) in [(1.5, 0.3), (-0.4, 1.9), (2.2, 2.5), (-1.0, -1.0)] {
            let s = sample_default_pair([&a, &b], 10.0, &cop, z1, z2);
            let f = WeightFn {
                model: &m,
                sample: &s,
                second: false,
            };
            let t = WeightFn {
                model: &m,
                sample: &s,
                second: true,
            };
            let (_, g1) = adcore::value_and_gradient(&f, &theta);
            let (_, g2) = adcore::value_and_gradient(&t, &theta);
            for (x, y) in g1.entries.iter().zip(&g2.entries) {
                assert!((x - y).abs() <= 1e-10 * (1.0 + x.abs()), "{x} vs {y} at {s:?}");
            }
        }
    }

    #[test]
    fn zero_correlation_reduces_to_independent() {
        let a = flat(0.03);
        let b = flat(0.08);
        let cop = GaussianCopula2::new(0.0).unwrap();
        for (z1, z2) in [(1.5, 0.3), (-0.4, 1.9), (0.0, -2.0)] {
            let s = sample_default_pair([&a, &b], 10.0, &cop, z1, z2);
            let pair = weight_pair_copula([&a, &b], &s, &cop).unwrap();
            let mut single = Vec::new();
            for i in 0..2 {
                let one = DefaultSample {
                    eps: vec![s.eps[i]],
                    u: vec![s.u[i]],
                    tau: vec![s.tau[i]],
                    horizon: 10.0,
                };
                single.extend(weight_single_censored([&a, &b][i], &one).unwrap().grad);
            }
            for (x, y) in pair.grad.iter().zip(&single) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn survivor_free_independence_reduction() {
        let a = flat(0.2);
        let b = flat(0.01);
        let cop = GaussianCopula2::new(0.0).unwrap();
        let s = sample_default_pair([&a, &b], 10.0, &cop, 0.8, -1.0);
        assert!(s.defaulted(0) && !s.defaulted(1));
        let w = weight_pair_survivor_free([&a, &b], &s, &cop).unwrap();
        let one = DefaultSample {
            eps: vec![s.eps[0]],
            u: vec![s.u[0]],
            tau: vec![s.tau[0]],
            horizon: 10.0,
        };
        let w1 = weight_single_censored(&a, &one).unwrap();
        assert!((w.value - (w1.value - 0.1)).abs() < 1e-12);
        assert!((cop.conditional_tail(0.6, 0.3) - 0.4).abs() < 1e-15);
        // name 1 surviving → unused
        let s = sample_default_pair([&a, &b], 10.0, &cop, 3.0, -3.0);
        assert!(weight_pair_survivor_free([&a, &b], &s, &cop).unwrap().unused);
    }

    #[test]
    fn copula_density_integrates_to_one() {
        let cop = GaussianCopula2::new(0.5).unwrap();
        // ∫∫ c(Φ(y1),Φ(y2)) φ(y1) φ(y2) dy, midpoint rule on [−9,9]²
        let n = 600;
        let h = 18.0 / n as f64;
        let mut s = 0.0;
        for i in 0..n {
            let y1 = -9.0 + (i as f64 + 0.5) * h;
            for j in 0..n {
                let y2 = -9.0 + (j as f64 + 0.5) * h;
                s += cop.log_density_scores(y1, y2).exp() * normal::pdf(y1) * normal::pdf(y2);
            }
        }
        assert!((s * h * h - 1.0).abs() < 1e-6);
    }

    #[test]
    fn decomposition_examples() {
        let f: HashMap<u32, f64> = [(0, 0.3), (1, 1.7)].into_iter().collect();
        let a = decompose_payoff(1, &f).unwrap();
        assert_eq!(a, vec![0.3, 1.7 - 0.3]);
        let f: HashMap<u32, f64> = (0..4).map(|m: u32| (m, m.count_ones() as f64)).collect();
        assert_eq!(decompose_payoff(2, &f).unwrap()[3], 0.0);
        let mut f: HashMap<u32, f64> = (0..8).map(|m| (m, m as f64)).collect();
        f.remove(&5);
        let e = decompose_payoff(3, &f).unwrap_err();
        assert!(e.to_string().contains("{1,3}"), "{e}");
    }

    #[test]
    fn rejects_wide_copula() {
        let c = flat(0.02);
        let cop = GaussianCopula2::new(0.3).unwrap();
        assert!(CreditModel::new(
            vec![c.clone(), c.clone(), c],
            Dependence::Gaussian(cop),
            WeightScheme::Censored
        )
        .is_err());
        assert!(GaussianCopula2::new(1.0).is_err());
    }
}
