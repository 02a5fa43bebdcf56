//! Adjoint evaluation engine.
//!
//! Computations are written once against [`Scalar`] and then evaluated on plain
//! `f64`, recorded on a [`Tape`] for reverse-mode gradients, or recorded with
//! [`Dual`] values so that each reverse sweep also yields one Hessian column
//! (forward-over-reverse).

mod dual;
mod scalar;
mod tape;

pub use dual::Dual;
pub use scalar::{apply_unary, Scalar};
pub use tape::{Tape, TapeValue, Var};

use thiserror::Error;

/// Largest input dimension accepted by [`small_hessian`].
pub const MAX_HESSIAN_DIM: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdError {
    #[error("unsupported primitive `{0}`")]
    UnsupportedPrimitive(String),
    #[error("hessian dimension {dim} exceeds the limit of {max}; split the weight per name or pillar block instead")]
    DimensionTooLarge { dim: usize, max: usize },
}

/// A scalar function that can be evaluated on any [`Scalar`].
pub trait ScalarFn {
    fn eval<S: Scalar>(&self, x: &[S]) -> S;
}

/// Partial derivatives, one per registered input (zeros included).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Gradient {
    pub entries: Vec<f64>,
}

impl Gradient {
    pub fn zeros(n: usize) -> Self {
        Self { entries: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl std::ops::Index<usize> for Gradient {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

/// Dense symmetric matrix of second derivatives, row-major.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SmallHessian {
    pub dim: usize,
    pub entries: Vec<f64>,
    /// Largest `|H_ij - H_ji|` before symmetrization, relative to the largest entry.
    pub asymmetry: f64,
}

impl SmallHessian {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![0.0; dim * dim],
            asymmetry: 0.0,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    fn symmetrize(&mut self) {
        let n = self.dim;
        let scale = self.entries.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut asym = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let a = self.entries[i * n + j];
                let b = self.entries[j * n + i];
                asym = asym.max((a - b).abs());
                let m = 0.5 * (a + b);
                self.entries[i * n + j] = m;
                self.entries[j * n + i] = m;
            }
        }
        self.asymmetry = if scale > 0.0 { asym / scale } else { 0.0 };
    }
}

/// A recorded evaluation: the value and the tape that produced it.
pub struct Recording {
    pub value: f64,
    tape: Tape<f64>,
    output: Option<u32>,
    n_inputs: usize,
}

impl Recording {
    pub fn tape_len(&self) -> usize {
        self.tape.len()
    }
}

/// Records `f` at `x`.
pub fn record<F: ScalarFn + ?Sized>(f: &F, x: &[f64]) -> Recording {
    let tape = Tape::with_capacity(64 + 8 * x.len());
    let (value, output) = {
        let xs = tape.inputs(x);
        let y = f.eval(&xs);
        (y.value(), y.node_id())
    };
    Recording {
        value,
        tape,
        output,
        n_inputs: x.len(),
    }
}

/// Reverse sweep over a recording.
pub fn gradient(rec: &Recording) -> Gradient {
    let mut entries = vec![0.0; rec.n_inputs];
    if let Some(out) = rec.output {
        // Inputs were registered first, so their node ids are 0..n.
        let adj = rec.tape.adjoints_at(out);
        for (i, e) in entries.iter_mut().enumerate() {
            if i < adj.len() {
                *e = adj[i];
            }
        }
    }
    Gradient { entries }
}

/// Value and gradient in one pass.
pub fn value_and_gradient<F: ScalarFn + ?Sized>(f: &F, x: &[f64]) -> (f64, Gradient) {
    let rec = record(f, x);
    let g = gradient(&rec);
    (rec.value, g)
}

/// Hessian by forward-over-reverse: one dual-valued reverse sweep per input direction.
pub fn small_hessian<F: ScalarFn + ?Sized>(f: &F, x: &[f64]) -> Result<SmallHessian, AdError> {
    value_gradient_hessian(f, x).map(|(_, _, h)| h)
}

/// Value, gradient and symmetrized Hessian.
pub fn value_gradient_hessian<F: ScalarFn + ?Sized>(
    f: &F,
    x: &[f64],
) -> Result<(f64, Gradient, SmallHessian), AdError> {
    let n = x.len();
    if n > MAX_HESSIAN_DIM {
        return Err(AdError::DimensionTooLarge {
            dim: n,
            max: MAX_HESSIAN_DIM,
        });
    }
    let mut hess = SmallHessian::zeros(n);
    let mut grad = Gradient::zeros(n);
    let mut value = f.eval(x);
    let mut tape: Tape<Dual> = Tape::with_capacity(64 + 8 * n);
    let mut seeds: Vec<Dual> = x.iter().map(|&v| Dual::new(v, 0.0)).collect();
    for k in 0..n {
        tape.clear();
        seeds[k].d = 1.0;
        {
            let xs = tape.inputs(&seeds);
            let y = f.eval(&xs);
            value = y.value();
            let g = tape.gradient(&y, &xs);
            for (i, gi) in g.iter().enumerate() {
                hess.entries[i * n + k] = gi.d;
                if k == 0 {
                    grad.entries[i] = gi.v;
                }
            }
        }
        seeds[k].d = 0.0;
    }
    hess.symmetrize();
    Ok((value, grad, hess))
}
