//! Discount and credit term structures, fixture loading and the spread bootstrap.
//!
//! Both curves are stored as pillar values and evaluated through generic functions
//! so that the same code serves plain pricing and taped sensitivities.

use std::path::Path;

use crate::adcore::Scalar;
use crate::error::{invalid, Error, Result};

/// Columns of a `pillar,time,zero` fixture file.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveColumns {
    pub labels: Vec<String>,
    pub times: Vec<f64>,
    pub zeros: Vec<f64>,
}

/// Reads a curve fixture. Row numbers in errors count data rows from 1.
pub fn load_curve_csv(path: impl AsRef<Path>) -> Result<CurveColumns> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let fail = |msg: String| Error::Fixture {
        path: name.clone(),
        msg,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| fail(e.to_string()))?;
    let headers = rdr.headers().map_err(|e| fail(e.to_string()))?.clone();
    let expected = ["pillar", "time", "zero"];
    if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(fail(format!(
            "missing header `pillar,time,zero` (found `{}`)",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = CurveColumns {
        labels: Vec::new(),
        times: Vec::new(),
        zeros: Vec::new(),
    };
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let row_err = |msg: String| Error::Row {
            path: name.clone(),
            row,
            msg,
        };
        let rec = rec.map_err(|e| row_err(e.to_string()))?;
        if rec.len() != 3 {
            return Err(row_err(format!("expected 3 fields, found {}", rec.len())));
        }
        let num = |k: usize, what: &str| -> Result<f64> {
            rec[k]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| row_err(format!("unparsable {what} `{}`", &rec[k])))
        };
        let t = num(1, "time")?;
        let z = num(2, "zero")?;
        if t <= 0.0 {
            return Err(row_err(format!("time {t} is not positive")));
        }
        if let Some(&prev) = out.times.last() {
            if t <= prev {
                return Err(row_err(format!("time {t} does not increase (previous {prev})")));
            }
        }
        out.labels.push(rec[0].to_string());
        out.times.push(t);
        out.zeros.push(z);
    }
    if out.times.is_empty() {
        return Err(fail("no pillars".into()));
    }
    Ok(out)
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidCurve("no pillars".into()));
    }
    if !(times[0] > 0.0) {
        return Err(Error::InvalidCurve("first pillar time must be positive".into()));
    }
    if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidCurve(format!(
            "pillar times not increasing at {} -> {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

fn default_labels(times: &[f64]) -> Vec<String> {
    times.iter().map(|t| format!("{t}")).collect()
}

/// Continuously compounded zero rates, linear between pillars, flat outside.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroCurve {
    labels: Vec<String>,
    times: Vec<f64>,
    rates: Vec<f64>,
}

impl ZeroCurve {
    pub fn new(times: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        let labels = default_labels(&times);
        Self::with_labels(labels, times, rates)
    }

    pub fn with_labels(labels: Vec<String>, times: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        check_times(&times)?;
        if rates.len() != times.len() || labels.len() != times.len() {
            return Err(Error::InvalidCurve("column lengths differ".into()));
        }
        if rates.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidCurve("non-finite zero rate".into()));
        }
        Ok(Self { labels, times, rates })
    }

    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let c = load_curve_csv(path)?;
        Self::with_labels(c.labels, c.times, c.zeros)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// The pillar rates, i.e. the rate parameters ψ.
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Same pillars, new rates.
    pub fn with_rates(&self, rates: &[f64]) -> Result<Self> {
        Self::with_labels(self.labels.clone(), self.times.clone(), rates.to_vec())
    }

    pub fn zero_rate(&self, t: f64) -> f64 {
        zero_rate_with(&self.times, &self.rates, t)
    }

    /// D(0,t) = exp(−r(t)·t).
    pub fn discount(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(invalid(format!("discount at negative time {t}")));
        }
        Ok(self.discount_with(&self.rates, t))
    }

    /// Discount factor with externally supplied pillar rates (for taping in ψ).
    #[inline]
    pub fn discount_with<S: Scalar>(&self, rates: &[S], t: S) -> S {
        discount_with(&self.times, rates, t)
    }
}

/// Index `j` such that `times[j-1] <= t < times[j]`, i.e. the number of pillars at or before `t`.
#[inline]
fn segment(times: &[f64], t: f64) -> usize {
    times.partition_point(|&p| p <= t)
}

pub(crate) fn zero_rate_with<S: Scalar>(times: &[f64], rates: &[S], t: S) -> S {
    let n = times.len();
    let j = segment(times, t.value());
    if j == 0 {
        rates[0]
    } else if j >= n {
        rates[n - 1]
    } else {
        let (t0, t1) = (times[j - 1], times[j]);
        let w = (t - t0) / (t1 - t0);
        rates[j - 1] + (rates[j] - rates[j - 1]) * w
    }
}

pub(crate) fn discount_with<S: Scalar>(times: &[f64], rates: &[S], t: S) -> S {
    (-(zero_rate_with(times, rates, t) * t)).exp()
}

/// Cumulative hazard linear between (0,0) and the pillar points (T_j, λ̄_j·T_j).
///
/// The hazard is therefore piecewise constant and right-continuous; past the last
/// pillar the last segment's slope is kept.
#[derive(Clone, Debug, PartialEq)]
pub struct HazardCurve {
    labels: Vec<String>,
    times: Vec<f64>,
    zeros: Vec<f64>,
}

impl HazardCurve {
    pub fn new(times: Vec<f64>, zeros: Vec<f64>) -> Result<Self> {
        let labels = default_labels(&times);
        Self::with_labels(labels, times, zeros)
    }

    pub fn with_labels(labels: Vec<String>, times: Vec<f64>, zeros: Vec<f64>) -> Result<Self> {
        check_times(&times)?;
        if zeros.len() != times.len() || labels.len() != times.len() {
            return Err(Error::InvalidCurve("column lengths differ".into()));
        }
        let mut prev = (0.0, 0.0);
        for (j, (&t, &z)) in times.iter().zip(&zeros).enumerate() {
            let cum = z * t;
            let h = (cum - prev.1) / (t - prev.0);
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::InvalidCurve(format!(
                    "implied hazard {h:e} on segment ending at pillar {} ({t}) is not positive",
                    labels[j]
                )));
            }
            prev = (t, cum);
        }
        Ok(Self { labels, times, zeros })
    }

    /// Flat zero intensity on the given pillars (a constant hazard).
    pub fn flat(lambda: f64, times: Vec<f64>) -> Result<Self> {
        let zeros = vec![lambda; times.len()];
        Self::new(times, zeros)
    }

    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let c = load_curve_csv(path)?;
        Self::with_labels(c.labels, c.times, c.zeros)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// The zero intensities λ̄, i.e. the credit parameters θ of this name.
    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn with_zeros(&self, zeros: &[f64]) -> Result<Self> {
        Self::with_labels(self.labels.clone(), self.times.clone(), zeros.to_vec())
    }

    pub fn cumulative_hazard(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(invalid(format!("cumulative hazard at negative time {t}")));
        }
        Ok(self.cum_hazard_with(&self.zeros, t))
    }

    pub fn hazard(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(invalid(format!("hazard at negative time {t}")));
        }
        Ok(self.hazard_with(&self.zeros, t))
    }

    pub fn survival(&self, t: f64) -> Result<f64> {
        self.cumulative_hazard(t).map(|l| (-l).exp())
    }

    #[inline]
    fn knot<S: Scalar>(&self, zeros: &[S], j: usize) -> (f64, S) {
        if j == 0 {
            (0.0, S::zero())
        } else {
            let t = self.times[j - 1];
            (t, zeros[j - 1] * t)
        }
    }

    /// Segment `k` spans knots `k` and `k+1` (knot 0 is the origin); clamped to the last one.
    #[inline]
    fn segment_of(&self, t: f64) -> usize {
        segment(&self.times, t).min(self.times.len() - 1)
    }

    #[inline]
    fn slope<S: Scalar>(&self, zeros: &[S], k: usize) -> S {
        let (t0, l0) = self.knot(zeros, k);
        let (t1, l1) = self.knot(zeros, k + 1);
        (l1 - l0) / (t1 - t0)
    }

    /// Λ(t) with pillar values `zeros` (θ); `t` may itself be active.
    pub fn cum_hazard_with<S: Scalar>(&self, zeros: &[S], t: S) -> S {
        let k = self.segment_of(t.value());
        let (t0, l0) = self.knot(zeros, k);
        l0 + self.slope(zeros, k) * (t - t0)
    }

    /// Right-continuous hazard λ(t).
    pub fn hazard_with<S: Scalar>(&self, zeros: &[S], t: f64) -> S {
        self.slope(zeros, self.segment_of(t))
    }

    /// Solves Λ(τ) = ε on the curve's own pillars.
    pub fn inverse(&self, eps: f64) -> f64 {
        self.inverse_with(&self.zeros, eps)
    }

    /// Λ⁻¹(ε) as a function of θ, for fixed ε.
    pub fn inverse_with<S: Scalar>(&self, zeros: &[S], eps: f64) -> S {
        let n = self.times.len();
        let mut k = 0;
        while k + 1 < n && self.knot(zeros, k + 1).1.value() <= eps {
            k += 1;
        }
        let (t0, l0) = self.knot(zeros, k);
        (-(l0 - eps)) / self.slope(zeros, k) + t0
    }

    /// Continuous par spreads c_j = λ̄_j·lgd.
    pub fn spreads_from_hazard(&self, lgd: f64) -> Result<Vec<f64>> {
        check_lgd(lgd)?;
        Ok(self.zeros.iter().map(|z| z * lgd).collect())
    }

    pub fn hazard_from_spreads(c: &[f64], times: &[f64], lgd: f64) -> Result<Self> {
        check_lgd(lgd)?;
        if c.len() != times.len() {
            return Err(invalid("spread and time vectors differ in length"));
        }
        if let Some(bad) = c.iter().find(|&&x| !(x > 0.0)) {
            return Err(invalid(format!("nonpositive spread {bad}")));
        }
        Self::new(times.to_vec(), c.iter().map(|x| x / lgd).collect())
    }
}

fn check_lgd(lgd: f64) -> Result<()> {
    if lgd > 0.0 && lgd <= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("lgd {lgd} outside (0,1]")))
    }
}

/// Market quotes the model is calibrated to.
#[derive(Clone, Debug, PartialEq)]
pub struct QuoteSet {
    pub credit: Vec<f64>,
    pub rates: Vec<f64>,
    pub lgd: f64,
}

impl QuoteSet {
    pub fn new(credit: Vec<f64>, rates: Vec<f64>, lgd: f64) -> Result<Self> {
        check_lgd(lgd)?;
        if let Some(bad) = credit.iter().find(|&&x| !(x > 0.0)) {
            return Err(invalid(format!("nonpositive spread {bad}")));
        }
        Ok(Self { credit, rates, lgd })
    }
}

/// Residuals b_j = θ_j·lgd − c_j of the perfect-fit spread bootstrap.
pub fn bootstrap_residual(theta: &[f64], c: &[f64], lgd: f64) -> Result<Vec<f64>> {
    if theta.len() != c.len() {
        return Err(invalid(format!(
            "residual needs equal lengths, got θ {} and c {}",
            theta.len(),
            c.len()
        )));
    }
    Ok(theta.iter().zip(c).map(|(t, c)| t * lgd - c).collect())
}
