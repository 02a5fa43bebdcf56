//! From model-parameter sensitivities to market-quote sensitivities.
//!
//! A calibration is a residual system b(θ, m) = 0 with as many equations as credit
//! parameters θ. The market vector m holds the credit quotes c first and the rate
//! quotes q after them. Rate parameters ψ map to q directly (dψ/dq supplied).

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::error::{invalid, Error, Result};

/// Perfect-fit calibration residuals with first and second derivatives.
pub trait Calibration {
    fn n_theta(&self) -> usize;
    /// Number of credit quotes c at the start of m.
    fn n_credit(&self) -> usize;
    fn n_market(&self) -> usize;
    fn residual(&self, theta: &[f64], m: &[f64]) -> DVector<f64>;
    /// ∂b/∂θ, n_θ × n_θ.
    fn jac_theta(&self, theta: &[f64], m: &[f64]) -> DMatrix<f64>;
    /// ∂b/∂m, n_θ × n_m.
    fn jac_market(&self, theta: &[f64], m: &[f64]) -> DMatrix<f64>;
    /// Hessian of b_k jointly in (θ, m).
    fn hessian(&self, k: usize, theta: &[f64], m: &[f64]) -> DMatrix<f64>;
    /// Solves b(θ, m) = 0 for θ.
    fn calibrate(&self, m: &[f64]) -> Result<Vec<f64>>;
}

/// Above this the Jacobian is treated as singular.
const MAX_COND: f64 = 1e12;

fn condition(j: &DMatrix<f64>) -> f64 {
    let s = j.singular_values();
    let hi = s.max();
    let lo = s.min();
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Factorized ∂b/∂θ at a calibrated point, shared by every solve.
pub struct Linearization {
    lu: LU<f64, Dyn, Dyn>,
    /// dθ/dm = −(∂b/∂θ)⁻¹ ∂b/∂m.
    pub sens: DMatrix<f64>,
    pub cond: f64,
    theta: Vec<f64>,
    m: Vec<f64>,
}

impl Linearization {
    pub fn new<C: Calibration + ?Sized>(cal: &C, theta: &[f64], m: &[f64]) -> Result<Self> {
        let j = cal.jac_theta(theta, m);
        if j.nrows() != j.ncols() || j.nrows() != cal.n_theta() {
            return Err(invalid(format!("calibration jacobian is {}x{}", j.nrows(), j.ncols())));
        }
        let cond = condition(&j);
        if !(cond < MAX_COND) {
            return Err(Error::Singular { cond });
        }
        let lu = j.lu();
        let jac_market = cal.jac_market(theta, m);
        let sens = -lu.solve(&jac_market).ok_or(Error::Singular { cond })?;
        Ok(Self {
            lu,
            sens,
            cond,
            theta: theta.to_vec(),
            m: m.to_vec(),
        })
    }

    /// Calibrates at `m` and linearizes there.
    pub fn at<C: Calibration + ?Sized>(cal: &C, m: &[f64]) -> Result<Self> {
        let theta = cal.calibrate(m)?;
        let r = cal.residual(&theta, m);
        if r.amax() > 1e-10 {
            return Err(invalid(format!("calibration residual {:e} above 1e-10", r.amax())));
        }
        Self::new(cal, &theta, m)
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// ᾱ(v, m) = −vᵀ(∂b/∂θ)⁻¹∂b/∂m: the market gradient of a model gradient v.
    pub fn pullback(&self, v: &[f64]) -> Vec<f64> {
        (DVector::from_column_slice(v).transpose() * &self.sens)
            .iter()
            .copied()
            .collect()
    }

    fn solve(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        self.lu.solve(rhs).expect("factorization checked at construction")
    }

    /// −Σ_k y_k Q_k over market columns `rows` × `cols`, y = (∂b/∂θ)⁻ᵀ p_θ.
    ///
    /// Q_k[a,b] = t_aᵀ H_k t_b with t_a = (∂θ/∂m_a, e_a), built through column solves
    /// against the shared factorization.
    fn curvature<C: Calibration + ?Sized>(
        &self,
        cal: &C,
        p_theta: &[f64],
        rows: &[usize],
        cols: &[usize],
    ) -> DMatrix<f64> {
        let nt = cal.n_theta();
        let nm = cal.n_market();
        let tangent = |a: usize| {
            let mut t = DVector::zeros(nt + nm);
            t.rows_mut(0, nt).copy_from(&self.sens.column(a));
            t[nt + a] = 1.0;
            t
        };
        let tr: Vec<_> = rows.iter().map(|&a| tangent(a)).collect();
        let tc: Vec<_> = cols.iter().map(|&b| tangent(b)).collect();
        // columns Q[·, a, b] stacked as a n_θ × (rows·cols) right-hand side
        let mut q = DMatrix::zeros(nt, rows.len() * cols.len());
        for k in 0..nt {
            let h = cal.hessian(k, &self.theta, &self.m);
            if h.iter().all(|&x| x == 0.0) {
                continue;
            }
            for (i, a) in tr.iter().enumerate() {
                let ha = &h * a;
                for (j, b) in tc.iter().enumerate() {
                    q[(k, i * cols.len() + j)] = ha.dot(b);
                }
            }
        }
        let z = self.solve(&q);
        let p = DVector::from_column_slice(p_theta);
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| -p.dot(&z.column(i * cols.len() + j)))
    }
}

/// Market first and second order sensitivities.
#[derive(Clone, Debug, PartialEq)]
pub struct MarketSensitivities {
    pub dp_dc: Vec<f64>,
    pub dp_dq: Vec<f64>,
    /// n_c × n_c, symmetric.
    pub d2p_dc2: DMatrix<f64>,
    /// n_q × n_c.
    pub d2p_dqdc: DMatrix<f64>,
}

/// ∂P/∂m = −p_θ(∂b/∂θ)⁻¹∂b/∂m, plus p_ψ·dψ/dq on the rate block.
pub fn first_order_implicit<C: Calibration + ?Sized>(
    cal: &C,
    lin: &Linearization,
    p_theta: &[f64],
    p_psi: &[f64],
    dpsi_dq: &DMatrix<f64>,
) -> Result<Vec<f64>> {
    let mut g = lin.pullback(p_theta);
    let nc = cal.n_credit();
    if dpsi_dq.nrows() != p_psi.len() || dpsi_dq.ncols() != cal.n_market() - nc {
        return Err(invalid("dψ/dq shape does not match ψ and q"));
    }
    let extra = DVector::from_column_slice(p_psi).transpose() * dpsi_dq;
    for (gi, e) in g[nc..].iter_mut().zip(extra.iter()) {
        *gi += e;
    }
    Ok(g)
}

/// p_θ · (θ(m + hμ) − θ(m))/h.
pub fn first_order_fd_direction<C: Calibration + ?Sized>(
    cal: &C,
    p_theta: &[f64],
    m: &[f64],
    mu: &[f64],
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(invalid("h must be positive"));
    }
    let t0 = cal.calibrate(m)?;
    let t1 = cal.calibrate(&shift(m, mu, h))?;
    Ok(p_theta
        .iter()
        .zip(t1.iter().zip(&t0))
        .map(|(p, (a, b))| p * (a - b))
        .sum::<f64>()
        / h)
}

fn shift(m: &[f64], mu: &[f64], h: f64) -> Vec<f64> {
    m.iter().zip(mu).map(|(x, d)| x + h * d).collect()
}

/// [ᾱ(p_θθ·Δθ − p_θ, m) + ᾱ(p_θ, m + hμ)]/h ≈ ∂²P/∂m² · μ.
pub fn second_order_fd_direction<C: Calibration + ?Sized>(
    cal: &C,
    p_theta: &[f64],
    p_tt: &DMatrix<f64>,
    m: &[f64],
    mu: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(invalid("h must be positive"));
    }
    let base = Linearization::at(cal, m)?;
    let bumped = Linearization::at(cal, &shift(m, mu, h))?;
    let dt = DVector::from_iterator(
        p_theta.len(),
        bumped.theta().iter().zip(base.theta()).map(|(a, b)| a - b),
    );
    let v: Vec<f64> = (p_tt * dt).iter().zip(p_theta).map(|(a, p)| a - p).collect();
    let a = base.pullback(&v);
    let b = bumped.pullback(p_theta);
    Ok(a.iter().zip(&b).map(|(x, y)| (x + y) / h).collect())
}

/// ∂²P/∂c² = Sᵀp_θθS + curvature addend, S = ∂θ/∂c; symmetrized.
pub fn market_gamma<C: Calibration + ?Sized>(
    cal: &C,
    lin: &Linearization,
    p_theta: &[f64],
    p_tt: &DMatrix<f64>,
) -> DMatrix<f64> {
    let nc = cal.n_credit();
    let s = lin.sens.columns(0, nc);
    let cols: Vec<usize> = (0..nc).collect();
    let g = s.transpose() * p_tt * s + lin.curvature(cal, p_theta, &cols, &cols);
    (&g + g.transpose()) * 0.5
}

/// ∂²P/∂q∂c = curvature addend + (∂θ/∂q)ᵀp_θθ(∂θ/∂c) + (dψ/dq)ᵀp_ψθ(∂θ/∂c), as n_q × n_c.
///
/// `p_theta_psi` is the model cross Gamma, n_θ × n_ψ.
pub fn market_cross_gamma<C: Calibration + ?Sized>(
    cal: &C,
    lin: &Linearization,
    p_theta: &[f64],
    p_tt: &DMatrix<f64>,
    p_theta_psi: &DMatrix<f64>,
    dpsi_dq: &DMatrix<f64>,
) -> DMatrix<f64> {
    let nc = cal.n_credit();
    let nq = cal.n_market() - nc;
    let sc = lin.sens.columns(0, nc);
    let sq = lin.sens.columns(nc, nq);
    let rows: Vec<usize> = (nc..nc + nq).collect();
    let cols: Vec<usize> = (0..nc).collect();
    lin.curvature(cal, p_theta, &rows, &cols)
        + sq.transpose() * p_tt * sc
        + dpsi_dq.transpose() * p_theta_psi.transpose() * sc
}

/// All market sensitivities at the calibrated point.
#[allow(clippy::too_many_arguments)]
pub fn convert<C: Calibration + ?Sized>(
    cal: &C,
    lin: &Linearization,
    p_theta: &[f64],
    p_psi: &[f64],
    p_tt: &DMatrix<f64>,
    p_theta_psi: &DMatrix<f64>,
    dpsi_dq: &DMatrix<f64>,
) -> Result<MarketSensitivities> {
    let g = first_order_implicit(cal, lin, p_theta, p_psi, dpsi_dq)?;
    let nc = cal.n_credit();
    Ok(MarketSensitivities {
        dp_dc: g[..nc].to_vec(),
        dp_dq: g[nc..].to_vec(),
        d2p_dc2: market_gamma(cal, lin, p_theta, p_tt),
        d2p_dqdc: market_cross_gamma(cal, lin, p_theta, p_tt, p_theta_psi, dpsi_dq),
    })
}

/// Errors of the directional second-order conversion at h and h/2 against `exact`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalvingDiagnostic {
    pub h: f64,
    pub err_h: f64,
    pub err_half: f64,
    /// err_h / err_half; about 2 for a first-order scheme.
    pub ratio: f64,
}

pub fn halving_diagnostic<C: Calibration + ?Sized>(
    cal: &C,
    p_theta: &[f64],
    p_tt: &DMatrix<f64>,
    m: &[f64],
    mu: &[f64],
    h: f64,
    exact: &[f64],
) -> Result<HalvingDiagnostic> {
    let err = |h: f64| -> Result<f64> {
        let v = second_order_fd_direction(cal, p_theta, p_tt, m, mu, h)?;
        Ok(v.iter().zip(exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    };
    let err_h = err(h)?;
    let err_half = err(h / 2.0)?;
    Ok(HalvingDiagnostic {
        h,
        err_h,
        err_half,
        ratio: err_h / err_half,
    })
}

/// Desk calibration b_j = θ_j·lgd − c_j; rate quotes do not enter.
#[derive(Clone, Debug, PartialEq)]
pub struct SpreadCalibration {
    pub lgd: f64,
    pub n_credit: usize,
    pub n_rates: usize,
}

impl Calibration for SpreadCalibration {
    fn n_theta(&self) -> usize {
        self.n_credit
    }

    fn n_credit(&self) -> usize {
        self.n_credit
    }

    fn n_market(&self) -> usize {
        self.n_credit + self.n_rates
    }

    fn residual(&self, theta: &[f64], m: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.n_credit, theta.iter().zip(m).map(|(t, c)| t * self.lgd - c))
    }

    fn jac_theta(&self, _: &[f64], _: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(self.n_credit, self.n_credit) * self.lgd
    }

    fn jac_market(&self, _: &[f64], _: &[f64]) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.n_credit, self.n_market());
        for i in 0..self.n_credit {
            j[(i, i)] = -1.0;
        }
        j
    }

    fn hessian(&self, _: usize, _: &[f64], _: &[f64]) -> DMatrix<f64> {
        let n = self.n_credit + self.n_market();
        DMatrix::zeros(n, n)
    }

    fn calibrate(&self, m: &[f64]) -> Result<Vec<f64>> {
        if !(self.lgd > 0.0) {
            return Err(invalid("lgd must be positive to calibrate"));
        }
        Ok(m[..self.n_credit].iter().map(|c| c / self.lgd).collect())
    }
}

/// Scalar calibration from a residual b(θ, c, q) with hand-coded derivatives.
pub struct ScalarCalibration {
    /// Whether m carries a rate quote q after c.
    pub with_rate: bool,
    pub b: fn(f64, f64, f64) -> f64,
    /// (b_θ, b_c, b_q)
    pub grad: fn(f64, f64, f64) -> [f64; 3],
    /// Hessian over (θ, c, q).
    pub hess: fn(f64, f64, f64) -> [[f64; 3]; 3],
    pub solve: fn(f64, f64) -> f64,
}

impl ScalarCalibration {
    fn split(&self, m: &[f64]) -> (f64, f64) {
        (m[0], if self.with_rate { m[1] } else { 0.0 })
    }

    /// θ = √c: b = θ² − c.
    pub fn square_root() -> Self {
        Self {
            with_rate: false,
            b: |t, c, _| t * t - c,
            grad: |t, _, _| [2.0 * t, -1.0, 0.0],
            hess: |_, _, _| [[2.0, 0.0, 0.0], [0.0; 3], [0.0; 3]],
            solve: |c, _| c.sqrt(),
        }
    }

    /// θ = c²: b = θ − c².
    pub fn square() -> Self {
        Self {
            with_rate: false,
            b: |t, c, _| t - c * c,
            grad: |_, c, _| [1.0, -2.0 * c, 0.0],
            hess: |_, _, _| [[0.0; 3], [0.0, -2.0, 0.0], [0.0; 3]],
            solve: |c, _| c * c,
        }
    }

    /// θ = c/q: b = θq − c.
    pub fn ratio() -> Self {
        Self {
            with_rate: true,
            b: |t, c, q| t * q - c,
            grad: |t, _, q| [q, -1.0, t],
            hess: |_, _, _| [[0.0, 0.0, 1.0], [0.0; 3], [1.0, 0.0, 0.0]],
            solve: |c, q| c / q,
        }
    }
}

impl Calibration for ScalarCalibration {
    fn n_theta(&self) -> usize {
        1
    }

    fn n_credit(&self) -> usize {
        1
    }

    fn n_market(&self) -> usize {
        1 + usize::from(self.with_rate)
    }

    fn residual(&self, theta: &[f64], m: &[f64]) -> DVector<f64> {
        let (c, q) = self.split(m);
        DVector::from_element(1, (self.b)(theta[0], c, q))
    }

    fn jac_theta(&self, theta: &[f64], m: &[f64]) -> DMatrix<f64> {
        let (c, q) = self.split(m);
        DMatrix::from_element(1, 1, (self.grad)(theta[0], c, q)[0])
    }

    fn jac_market(&self, theta: &[f64], m: &[f64]) -> DMatrix<f64> {
        let (c, q) = self.split(m);
        let g = (self.grad)(theta[0], c, q);
        DMatrix::from_row_slice(1, self.n_market(), &g[1..1 + self.n_market()])
    }

    fn hessian(&self, _: usize, theta: &[f64], m: &[f64]) -> DMatrix<f64> {
        let (c, q) = self.split(m);
        let h = (self.hess)(theta[0], c, q);
        let n = 1 + self.n_market();
        DMatrix::from_fn(n, n, |i, j| h[i][j])
    }

    fn calibrate(&self, m: &[f64]) -> Result<Vec<f64>> {
        let (c, q) = self.split(m);
        let t = (self.solve)(c, q);
        if !t.is_finite() {
            return Err(invalid(format!("calibration failed at m = {m:?}")));
        }
        Ok(vec![t])
    }
}
