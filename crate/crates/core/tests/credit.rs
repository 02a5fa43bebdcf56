use cva_greeks::credit::{
    decompose_payoff, reconstruct, sample_default, sample_default_pair, weight_pair_copula, weight_pair_survivor_free,
    weight_single_censored, CreditModel, Dependence, GaussianCopula2, WeightScheme,
};
use cva_greeks::curves::{HazardCurve, ZeroCurve};
use cva_greeks::greeks::{delta_conditional, Experiment, RunConfig};
use cva_greeks::hullwhite::{HullWhiteModel, SwapPricer, SwapSpec};
use cva_greeks::payoff::{CvaMode, CvaPayoff, IndicatorPayoff};
use cva_greeks::rng::PathRng;
use std::collections::HashMap;

fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn flat(l: f64, times: &[f64]) -> HazardCurve {
    HazardCurve::flat(l, times.to_vec()).unwrap()
}

fn pair(rho: f64, scheme: WeightScheme) -> CreditModel {
    let dep = Dependence::Gaussian(GaussianCopula2::new(rho).unwrap());
    CreditModel::new(
        vec![flat(0.08, &[2.0, 5.0, 10.0]), flat(0.04, &[3.0, 10.0])],
        dep,
        scheme,
    )
    .unwrap()
}

/// Sample mean and standard error.
fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

#[test]
fn inversion_examples() {
    let s = sample_default(&flat(0.02, &[10.0]), 10.0, 0.5);
    assert!(s.tau[0].is_none());
    let s = sample_default(&flat(0.2, &[10.0]), 10.0, 0.5);
    assert!((s.tau[0].unwrap() - 3.465_735_902_8).abs() < 1e-9);
}

#[test]
fn inversion_recovers_trigger() {
    let c = HazardCurve::from_csv(fixture("INDUSTRIAL_Ba.csv")).unwrap();
    let mut rng = PathRng::new(5, 0);
    for _ in 0..10_000 {
        let s = sample_default(&c, 10.0, rng.uniform());
        if let Some(t) = s.tau[0] {
            let back = c.cumulative_hazard(t).unwrap();
            assert!(
                (back - s.eps[0]).abs() <= 1e-12 * s.eps[0].max(1.0),
                "{back} vs {}",
                s.eps[0]
            );
        }
    }
}

#[test]
fn single_weight_examples() {
    let c = flat(0.02, &[20.0]);
    let s = sample_default(&c, 20.0, 0.5);
    // Λ(20) = 0.4 < ln 2, so the name survives: w = −Λ(T), ∂w/∂λ̄ = −T
    let w = weight_single_censored(&c, &s).unwrap();
    assert!((w.value + 0.4).abs() < 1e-14);
    assert!((w.grad[0] + 20.0).abs() < 1e-12);
    let s = sample_default(&c, 20.0, 0.3);
    let tau = s.tau[0].unwrap();
    let w = weight_single_censored(&c, &s).unwrap();
    assert!((w.value - (-0.02 * tau + 0.02f64.ln())).abs() < 1e-12);
    assert!((w.grad[0] - (1.0 / 0.02 - tau)).abs() < 1e-9);
}

#[test]
fn independent_pair_survival() {
    let m = CreditModel::new(
        vec![flat(0.05, &[10.0]), flat(0.03, &[10.0])],
        Dependence::Gaussian(GaussianCopula2::new(0.0).unwrap()),
        WeightScheme::Censored,
    )
    .unwrap();
    let n = 100_000;
    let mut hits = Vec::with_capacity(n);
    for p in 0..n as u64 {
        let s = m.sample(&mut PathRng::new(11, p), 10.0);
        hits.push(if s.defaulted_set() == 0 { 1.0 } else { 0.0 });
    }
    let (mean, se) = mean_se(&hits);
    let exact = (-0.5f64).exp() * (-0.3f64).exp();
    assert!((mean - exact).abs() < 3.0 * se, "{mean} vs {exact}");
}

#[test]
fn near_comonotone_pair() {
    let c = flat(0.05, &[10.0]);
    let cop = GaussianCopula2::new(0.999).unwrap();
    let mut rng = PathRng::new(3, 0);
    for _ in 0..10_000 {
        let s = sample_default_pair([&c, &c], 10.0, &cop, rng.normal(), rng.normal());
        assert!((s.u[0] - s.u[1]).abs() < 0.1);
    }
}

#[test]
fn joint_default_matches_bivariate_normal() {
    let (c1, c2) = (flat(0.06, &[10.0]), flat(0.03, &[10.0]));
    for rho in [-0.4, 0.3, 0.7] {
        let cop = GaussianCopula2::new(rho).unwrap();
        let p1 = 1.0 - (-0.6f64).exp();
        let p2 = 1.0 - (-0.3f64).exp();
        let exact = cop.cdf(p1, p2);
        let n = 1_000_000;
        let mut rng = PathRng::new(17, 0);
        let mut k = 0usize;
        for _ in 0..n {
            let s = sample_default_pair([&c1, &c2], 10.0, &cop, rng.normal(), rng.normal());
            k += (s.defaulted_set() == 3) as usize;
        }
        let freq = k as f64 / n as f64;
        let se = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!((freq - exact).abs() < 4.0 * se, "rho {rho}: {freq} vs {exact}");
    }
}

#[test]
fn conditional_tail_brute_force() {
    // P(U2 > u2 | U1 ≈ u1) from a thin band around u1
    let cop = GaussianCopula2::new(0.6).unwrap();
    let (u1, u2) = (0.3, 0.5);
    let mut rng = PathRng::new(23, 0);
    let (mut inside, mut above) = (0usize, 0usize);
    let c = flat(0.05, &[10.0]);
    while inside < 40_000 {
        let s = sample_default_pair([&c, &c], 10.0, &cop, rng.normal(), rng.normal());
        if (s.u[0] - u1).abs() < 0.005 {
            inside += 1;
            above += (s.u[1] > u2) as usize;
        }
    }
    let p = above as f64 / inside as f64;
    let exact = cop.conditional_tail(u2, u1);
    assert!((p - exact).abs() < 0.01, "{p} vs {exact}");
}

#[test]
fn copula_symmetry() {
    let cop = GaussianCopula2::new(0.45).unwrap();
    for (a, b) in [(0.1, 0.7), (0.33, 0.9), (0.5, 0.02)] {
        assert!((cop.log_density(a, b) - cop.log_density(b, a)).abs() < 1e-12);
        assert!((cop.cdf(a, b) - cop.cdf(b, a)).abs() < 1e-12);
    }
}

/// E[∂w] = 0 and E[∂²w + ∂w∂wᵀ] = 0 coordinate by coordinate, within 4 SE.
fn check_scores(m: &CreditModel, horizon: f64, n: usize) {
    let k = m.n_theta();
    let mut first = vec![Vec::with_capacity(n); k];
    let mut second = vec![Vec::with_capacity(n); k * k];
    for p in 0..n as u64 {
        let s = m.sample(&mut PathRng::new(29, p), horizon);
        let w = m.weight(&s, true).unwrap();
        assert!(!w.unused);
        let h = w.hess.unwrap();
        for a in 0..k {
            first[a].push(w.grad[a]);
            for b in 0..k {
                second[a * k + b].push(h.get(a, b) + w.grad[a] * w.grad[b]);
            }
        }
    }
    for (i, x) in first.iter().chain(&second).enumerate() {
        let (mean, se) = mean_se(x);
        assert!(mean.abs() <= 4.0 * se + 1e-12, "coordinate {i}: {mean} ± {se}");
    }
}

#[test]
fn score_identities_single() {
    let c = HazardCurve::from_csv(fixture("INDUSTRIAL_Ba.csv")).unwrap();
    check_scores(&CreditModel::single(c), 10.0, 100_000);
}

#[test]
fn score_identities_pair() {
    for rho in [0.0, 0.5] {
        check_scores(&pair(rho, WeightScheme::Censored), 10.0, 100_000);
    }
}

#[test]
fn score_identities_survivor_free() {
    check_scores(&pair(0.5, WeightScheme::SurvivorFreeFull), 10.0, 100_000);
}

#[test]
fn survivor_free_unused_without_reference_default() {
    let cop = GaussianCopula2::new(0.5).unwrap();
    let (c1, c2) = (flat(0.01, &[10.0]), flat(0.5, &[10.0]));
    let s = sample_default_pair([&c1, &c2], 10.0, &cop, 3.0, -3.0);
    assert!(!s.defaulted(0));
    assert!(weight_pair_survivor_free([&c1, &c2], &s, &cop).unwrap().unused);
    assert!(!weight_pair_copula([&c1, &c2], &s, &cop).unwrap().unused);
}

#[test]
fn pair_delta_matches_default_probability_slope() {
    // f = I{τ1 ≤ T}: d/dλ̄₁ P(τ1 ≤ T) = T e^{−λ̄₁T}, and nothing for name 2
    let t = 5.0;
    let dep = Dependence::Gaussian(GaussianCopula2::new(0.5).unwrap());
    let m = CreditModel::new(vec![flat(0.1, &[t]), flat(0.05, &[t])], dep, WeightScheme::Censored).unwrap();
    let x = Experiment::new(IndicatorPayoff::new(1.0, t), m).unwrap();
    let r = delta_conditional(&x, &RunConfig::new(100_000, 31)).unwrap();
    let exact = t * (-0.1 * t).exp();
    assert!(
        (r.mean(0) - exact).abs() < 3.0 * r.std_error(0),
        "{} vs {exact}",
        r.mean(0)
    );
    assert!(r.mean(1).abs() < 3.0 * r.std_error(1));
}

#[test]
fn censored_and_survivor_free_deltas_agree() {
    let spec = SwapSpec {
        notional: 1e8,
        fixed_rate: 0.00947,
        maturity_years: 10,
        receive_fixed: true,
    };
    let hw = HullWhiteModel::new(0.0744, 0.0125).unwrap();
    let pricer = SwapPricer::new(hw, ZeroCurve::from_csv(fixture("ESTR.csv")).unwrap(), spec).unwrap();
    let payoff = CvaPayoff::new(pricer, 0.6, CvaMode::Bilateral, 12).unwrap();
    let base = pair(0.5, WeightScheme::Censored);
    let cfg = RunConfig::new(50_000, 37);
    let a = delta_conditional(&Experiment::new(payoff.clone(), base.clone()).unwrap(), &cfg).unwrap();
    let sf = base.with_scheme(WeightScheme::SurvivorFree).unwrap();
    let b = delta_conditional(&Experiment::new(payoff, sf).unwrap(), &cfg).unwrap();
    for i in 0..base.n_theta() {
        let se = (a.std_error(i).powi(2) + b.std_error(i).powi(2)).sqrt();
        assert!(
            (a.mean(i) - b.mean(i)).abs() < 3.0 * se,
            "{}: {} vs {}",
            a.coordinates[i],
            a.mean(i),
            b.mean(i)
        );
    }
}

#[test]
fn decomposition_reconstructs_every_region() {
    let mut f = HashMap::new();
    for (m, v) in [
        (0u32, 1.5),
        (1, -2.0),
        (2, 0.25),
        (3, 7.0),
        (4, 3.0),
        (5, -1.0),
        (6, 0.0),
        (7, 2.5),
    ] {
        f.insert(m, v);
    }
    let a = decompose_payoff(3, &f).unwrap();
    for (m, v) in &f {
        assert!((reconstruct(&a, *m) - v).abs() < 1e-14);
    }
    f.remove(&5);
    let e = decompose_payoff(3, &f).unwrap_err().to_string();
    assert!(e.contains("{1,3}"), "{e}");
}
