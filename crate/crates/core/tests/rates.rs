use cva_greeks::adcore::{Scalar, Tape};
use cva_greeks::curves::{load_curve_csv, HazardCurve, ZeroCurve};
use cva_greeks::hullwhite::{simulate_paths, HullWhiteModel, PathSimulator, Side, SwapPricer, SwapSpec, TimeGrid};
use cva_greeks::rng::PathRng;
use proptest::prelude::*;

fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn estr() -> ZeroCurve {
    ZeroCurve::from_csv(fixture("ESTR.csv")).unwrap()
}

fn model() -> HullWhiteModel {
    HullWhiteModel::new(0.0744, 0.0125).unwrap()
}

fn swap() -> SwapSpec {
    SwapSpec {
        notional: 1e8,
        fixed_rate: 0.00947,
        maturity_years: 10,
        receive_fixed: true,
    }
}

fn desk() -> (PathSimulator, SwapPricer) {
    let s = swap();
    let grid = TimeGrid::regular(s.maturity(), 12, &s.payment_dates()).unwrap();
    (
        PathSimulator::new(model(), grid),
        SwapPricer::new(model(), estr(), s).unwrap(),
    )
}

#[test]
fn fixture_rows() {
    let r = load_curve_csv(fixture("ESTR.csv")).unwrap();
    let k = r.labels.iter().position(|l| l == "10Y").unwrap();
    assert_eq!(r.times[k], 10.02191781);
    assert_eq!(r.zeros[k], 0.009624168);
    assert_eq!(r.labels.len(), 62);
    let c = load_curve_csv(fixture("INDUSTRIAL_Ba.csv")).unwrap();
    let k = c.labels.iter().position(|l| l == "10Y").unwrap();
    assert_eq!((c.times[k], c.zeros[k]), (10.23287671, 0.037987808));
}

#[test]
fn fixture_errors_are_row_numbered() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    };
    let e = load_curve_csv(write("empty.csv", "pillar,time,zero\n")).unwrap_err();
    assert!(e.to_string().contains("no pillars"), "{e}");
    let e = load_curve_csv(write("hdr.csv", "label,t,z\n1Y,1,0.01\n")).unwrap_err();
    assert!(e.to_string().contains("header"), "{e}");
    let e = load_curve_csv(write("num.csv", "pillar,time,zero\n1Y,1,0.01\n2Y,2,abc\n")).unwrap_err();
    assert!(e.to_string().contains("row 2"), "{e}");
    let e = load_curve_csv(write(
        "inc.csv",
        "pillar,time,zero\n1Y,1,0.01\n2Y,0.5,0.02\n3Y,3,0.01\n",
    ))
    .unwrap_err();
    assert!(
        e.to_string().contains("row 2") && e.to_string().contains("increase"),
        "{e}"
    );
    assert!(load_curve_csv(dir.path().join("missing.csv")).is_err());
}

#[test]
fn pillar_reproduction() {
    let z = estr();
    for (t, r) in z.times().iter().zip(z.rates()) {
        assert_eq!(z.zero_rate(*t), *r);
    }
    let d = z.discount(10.02191781).unwrap();
    assert!((d - (-0.009624168f64 * 10.02191781).exp()).abs() < 1e-15);
    assert!((d - 0.90805).abs() < 5e-6);
    let last = *z.times().last().unwrap();
    let r_last = *z.rates().last().unwrap();
    assert_eq!(z.discount(last + 5.0).unwrap(), (-r_last * (last + 5.0)).exp());
    let h = HazardCurve::from_csv(fixture("INDUSTRIAL_Ba.csv")).unwrap();
    for (t, l) in h.times().iter().zip(h.zeros()) {
        assert!((h.cumulative_hazard(*t).unwrap() / t - l).abs() < 1e-15);
    }
    assert!((h.cumulative_hazard(10.23287671).unwrap() - 0.388724).abs() < 1e-6);
}

#[test]
fn spread_conversion() {
    let h = HazardCurve::new(vec![1.0], vec![0.037987808]).unwrap();
    let c = h.spreads_from_hazard(0.6).unwrap();
    assert!((c[0] - 0.0227926848).abs() < 1e-16);
    let back = HazardCurve::hazard_from_spreads(&[0.0227926848], &[1.0], 0.6).unwrap();
    assert!((back.zeros()[0] - 0.037987808).abs() < 1e-16);
    assert_eq!(h.spreads_from_hazard(1.0).unwrap(), h.zeros());
    assert!(HazardCurve::hazard_from_spreads(&[0.0], &[1.0], 0.6).is_err());
    assert!(h.spreads_from_hazard(0.0).is_err());
}

proptest! {
    #[test]
    fn bootstrap_round_trip(z in prop::collection::vec(0.001f64..0.5, 1..12), lgd in 0.05f64..1.0) {
        // flat-forward-consistent curves: increasing cumulative hazard
        let times: Vec<f64> = (1..=z.len()).map(|k| k as f64).collect();
        let mut cum = 0.0;
        let zeros: Vec<f64> = z.iter().zip(&times).map(|(h, t)| { cum += h; cum / t }).collect();
        let h = HazardCurve::new(times.clone(), zeros).unwrap();
        let c = h.spreads_from_hazard(lgd).unwrap();
        let back = HazardCurve::hazard_from_spreads(&c, &times, lgd).unwrap();
        for (a, b) in back.zeros().iter().zip(h.zeros()) {
            prop_assert!((a - b).abs() <= 1e-14 * b.abs());
        }
    }

    #[test]
    fn survival_is_monotone(z in prop::collection::vec(0.001f64..0.5, 1..12), t in prop::collection::vec(0.0f64..40.0, 2..20)) {
        let times: Vec<f64> = (1..=z.len()).map(|k| 1.5 * k as f64).collect();
        let mut cum = 0.0;
        let zeros: Vec<f64> = z.iter().zip(&times).map(|(h, t)| { cum += h * 1.5; cum / t }).collect();
        let h = HazardCurve::new(times, zeros).unwrap();
        let mut t = t;
        t.sort_by(|a, b| a.total_cmp(b));
        for w in t.windows(2) {
            prop_assert!(h.survival(w[1]).unwrap() <= h.survival(w[0]).unwrap());
        }
    }

    #[test]
    fn exact_inversion(e in 1e-8f64..0.388) {
        let h = HazardCurve::from_csv(fixture("INDUSTRIAL_Ba.csv")).unwrap();
        let tau = h.inverse(e);
        prop_assert!((h.cumulative_hazard(tau).unwrap() - e).abs() <= 1e-12);
    }
}

#[test]
fn bond_fits_curve() {
    let z = estr();
    let m = model();
    for &t in &[0.5, 3.0, 10.02191781, 25.0] {
        assert!((m.bond_price(&z, 0.0, t, 0.0).unwrap() - z.discount(t).unwrap()).abs() < 1e-12);
    }
    assert_eq!(m.bond_price(&z, 4.0, 4.0, 0.03).unwrap(), 1.0);
    assert!(m.bond_price(&z, 5.0, 4.0, 0.0).is_err());
    let fast = HullWhiteModel::new(1e3, 0.0125).unwrap();
    let a = z.discount(7.0).unwrap() / z.discount(3.0).unwrap();
    assert!((fast.bond_price(&z, 3.0, 7.0, 0.001).unwrap() - a).abs() < 1e-6);
}

#[test]
fn swap_is_near_atm() {
    let (_, pricer) = desk();
    let par = swap().par_rate(&estr()).unwrap();
    let npv0 = pricer.swap_npv(0.0, 0.0, 0.0, 0.0, Side::Before).unwrap();
    // oracle: annuity form on the curve alone
    let z = estr();
    let mut fixed = 0.0;
    for k in 1..=10 {
        fixed += 1e8 * 0.00947 * z.discount(k as f64).unwrap();
    }
    let oracle = fixed - 1e8 * (1.0 - z.discount(10.0).unwrap());
    assert!((npv0 - oracle).abs() < 1e-6 * 1e8);
    assert!(npv0.abs() < 0.0015 * 1e8, "npv0 {npv0}, par {par}");
    assert!(pricer.swap_npv(10.5, 0.0, 0.0, 0.0, Side::Before).is_err());
    assert_eq!(pricer.swap_npv(10.0, 0.01, 0.1, 0.09, Side::After).unwrap(), 0.0);
}

#[test]
fn receiver_npv_falls_with_factor() {
    let (_, pricer) = desk();
    let mut prev = f64::INFINITY;
    for k in 0..20 {
        let x = -0.05 + 0.01 * k as f64;
        let v = pricer.swap_npv(3.4, x, 0.01, 0.008, Side::Before).unwrap();
        assert!(v < prev);
        prev = v;
    }
}

#[test]
fn zero_volatility_paths() {
    let s = swap();
    let grid = TimeGrid::regular(10.0, 12, &s.payment_dates()).unwrap();
    let m = HullWhiteModel::new(0.0744, 0.0).unwrap();
    let g = simulate_paths(&m, &grid, 3, 1).unwrap();
    assert!(g.paths.iter().all(|p| p.x.iter().chain(&p.int).all(|v| *v == 0.0)));
    assert!(simulate_paths(&m, &grid, 0, 1).is_err());
}

#[test]
fn factor_variance_and_martingale() {
    let s = swap();
    let grid = TimeGrid::regular(10.0, 12, &s.payment_dates()).unwrap();
    let m = model();
    let z = estr();
    let n = 100_000;
    let g = simulate_paths(&m, &grid, n, 11).unwrap();
    let k1 = grid.index_of(1.0).unwrap();
    let xs: Vec<f64> = g.paths.iter().map(|p| p.x[k1]).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let oracle = 0.0125f64.powi(2) * (1.0 - (-2.0 * 0.0744f64).exp()) / (2.0 * 0.0744);
    assert!((oracle - 1.4518e-4).abs() < 1e-8);
    // se of a sample variance of a normal: var·sqrt(2/(n−1))
    assert!(
        (var - oracle).abs() < 3.0 * oracle * (2.0 / (n as f64 - 1.0)).sqrt(),
        "{var} vs {oracle}"
    );
    assert!(mean.abs() < 3.0 * (oracle / n as f64).sqrt());

    // E[exp(−∫r) P(t,T)] = D(T)
    for &t in &[1.0, 4.0, 7.0] {
        let k = grid.index_of(t).unwrap();
        for &big in &[t + 1.0, 10.0] {
            let vals: Vec<f64> = g
                .paths
                .iter()
                .map(|p| {
                    let num = z.discount(t).unwrap() * (-p.int[k] - m.convexity(0.0, t)).exp();
                    num * m.bond_price(&z, t, big, p.x[k]).unwrap()
                })
                .collect();
            let mu = vals.iter().sum::<f64>() / n as f64;
            let sd = (vals.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
            let d = z.discount(big).unwrap();
            assert!(
                (mu - d).abs() < 3.0 * sd / (n as f64).sqrt(),
                "t={t} T={big}: {mu} vs {d}"
            );
        }
    }
}

#[test]
fn npv_jumps_by_the_cash_flow() {
    let (sim, pricer) = desk();
    let mut rng = PathRng::new(5, 0);
    let path = sim.simulate(&mut rng);
    let rates = estr().rates().to_vec();
    for k in 1..=10 {
        let t = k as f64;
        let before = pricer.npv_on_path(&sim, &rates, &path, t, Side::Before);
        let after = pricer.npv_on_path(&sim, &rates, &path, t, Side::After);
        let kk = sim.grid().index_of(t).unwrap();
        let ka = sim.grid().index_of(t - 1.0).unwrap();
        let z = estr();
        let growth = z.discount(t - 1.0).unwrap() / z.discount(t).unwrap()
            * (path.int[kk] - path.int[ka] + model().convexity(t - 1.0, t)).exp();
        let flow = swap().net_flow(growth);
        assert!(
            (before - after - flow).abs() < 1e-3,
            "k={k}: {} vs {flow}",
            before - after
        );
        // continuity on either side of the date
        let eps = 1e-9;
        let left = pricer.npv_on_path(&sim, &rates, &path, t - eps, Side::Before);
        assert!((left - before).abs() < 1.0);
        if k < 10 {
            let right = pricer.npv_on_path(&sim, &rates, &path, t + eps, Side::Before);
            assert!((right - after).abs() < 1.0, "k={k}: {right} vs {after}");
        }
    }
}

#[test]
fn npv_rate_gradient_matches_fd() {
    let (sim, pricer) = desk();
    let base = estr().rates().to_vec();
    for p in 0..20u64 {
        let mut rng = PathRng::new(9, p);
        let path = sim.simulate(&mut rng);
        let t = 0.37 + 0.47 * p as f64;
        let tape = Tape::new();
        let xs = tape.inputs(&base);
        let v = pricer.npv_on_path(&sim, &xs, &path, Scalar::constant(t), Side::Before);
        let g = tape.gradient(&v, &xs);
        for i in 0..base.len() {
            let h = 1e-6;
            let mut up = base.clone();
            up[i] += h;
            let mut dn = base.clone();
            dn[i] -= h;
            let fd = (pricer.npv_on_path(&sim, &up, &path, t, Side::Before)
                - pricer.npv_on_path(&sim, &dn, &path, t, Side::Before))
                / (2.0 * h);
            let scale = g[i].abs().max(1e3);
            assert!(
                (g[i] - fd).abs() <= 1e-4 * scale,
                "path {p} pillar {i}: {} vs {fd}",
                g[i]
            );
        }
    }
}
