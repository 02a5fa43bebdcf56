use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::scalar::{bvn_partials, Scalar};

const NONE: u32 = u32::MAX;

/// Values a tape can carry: plain reals for gradients, duals for Hessian columns.
pub trait TapeValue: Scalar + Default + PartialEq {}
impl TapeValue for f64 {}
impl TapeValue for super::Dual {}

#[derive(Clone, Copy)]
struct Node<T> {
    lhs: u32,
    rhs: u32,
    dl: T,
    dr: T,
}

/// A linear record of elementary operations and their local partials.
///
/// Confined to one thread; every path builds and sweeps its own tape.
pub struct Tape<T = f64> {
    nodes: RefCell<Vec<Node<T>>>,
}

impl<T: TapeValue> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: TapeValue> Tape<T> {
    pub fn new() -> Self {
        Self::with_capacity(256)
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            nodes: RefCell::new(Vec::with_capacity(n)),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops every recorded node, keeping the allocation.
    pub fn clear(&mut self) {
        self.nodes.get_mut().clear();
    }

    fn push(&self, lhs: u32, dl: T, rhs: u32, dr: T) -> u32 {
        let mut nodes = self.nodes.borrow_mut();
        let idx = nodes.len() as u32;
        nodes.push(Node { lhs, rhs, dl, dr });
        idx
    }

    /// Registers an independent variable.
    pub fn input(&self, value: T) -> Var<'_, T> {
        let idx = self.push(NONE, T::default(), NONE, T::default());
        Var {
            tape: Some(self),
            idx,
            val: value,
        }
    }

    pub fn inputs(&self, values: &[T]) -> Vec<Var<'_, T>> {
        values.iter().map(|&v| self.input(v)).collect()
    }

    /// Reverse sweep seeded at `output`; returns adjoints of every node up to it.
    pub fn adjoints(&self, output: &Var<'_, T>) -> Vec<T> {
        match output.tape {
            Some(_) => self.adjoints_at(output.idx),
            None => Vec::new(),
        }
    }

    pub(crate) fn adjoints_at(&self, output: u32) -> Vec<T> {
        let nodes = self.nodes.borrow();
        let last = output as usize;
        let mut adj = vec![T::default(); last + 1];
        adj[last] = T::constant(1.0);
        let zero = T::default();
        for i in (0..=last).rev() {
            let a = adj[i];
            if a == zero {
                continue;
            }
            let node = nodes[i];
            if node.lhs != NONE {
                let j = node.lhs as usize;
                adj[j] = adj[j] + a * node.dl;
            }
            if node.rhs != NONE {
                let j = node.rhs as usize;
                adj[j] = adj[j] + a * node.dr;
            }
        }
        adj
    }

    /// Partials of `output` with respect to `inputs`, one entry per input.
    pub fn gradient(&self, output: &Var<'_, T>, inputs: &[Var<'_, T>]) -> Vec<T> {
        let adj = self.adjoints(output);
        inputs
            .iter()
            .map(|x| match x.tape {
                Some(_) if (x.idx as usize) < adj.len() => adj[x.idx as usize],
                _ => T::default(),
            })
            .collect()
    }
}

/// An active scalar: a value plus its position on a tape.
///
/// Constants carry no tape and record nothing.
#[derive(Clone, Copy)]
pub struct Var<'t, T = f64> {
    tape: Option<&'t Tape<T>>,
    idx: u32,
    val: T,
}

impl<T: fmt::Debug> fmt::Debug for Var<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tape {
            Some(_) => write!(f, "Var#{}({:?})", self.idx, self.val),
            None => write!(f, "Const({:?})", self.val),
        }
    }
}

impl<'t, T: TapeValue> Var<'t, T> {
    pub fn val(&self) -> T {
        self.val
    }

    pub fn node_id(&self) -> Option<u32> {
        self.tape.map(|_| self.idx)
    }

    pub fn is_active(&self) -> bool {
        self.tape.is_some()
    }

    #[inline]
    fn unary(self, val: T, d: T) -> Self {
        match self.tape {
            Some(t) => Var {
                tape: Some(t),
                idx: t.push(self.idx, d, NONE, T::default()),
                val,
            },
            None => Var {
                tape: None,
                idx: NONE,
                val,
            },
        }
    }

    #[inline]
    fn binary(self, o: Self, val: T, da: T, db: T) -> Self {
        match (self.tape, o.tape) {
            (Some(t), Some(u)) => {
                debug_assert!(std::ptr::eq(t, u), "variables from different tapes");
                Var {
                    tape: Some(t),
                    idx: t.push(self.idx, da, o.idx, db),
                    val,
                }
            }
            (Some(_), None) => self.unary(val, da),
            (None, Some(_)) => o.unary(val, db),
            (None, None) => Var {
                tape: None,
                idx: NONE,
                val,
            },
        }
    }
}

impl<'t, T: TapeValue> Add for Var<'t, T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        let one = T::constant(1.0);
        self.binary(o, self.val + o.val, one, one)
    }
}

impl<'t, T: TapeValue> Sub for Var<'t, T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        self.binary(o, self.val - o.val, T::constant(1.0), T::constant(-1.0))
    }
}

impl<'t, T: TapeValue> Mul for Var<'t, T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        self.binary(o, self.val * o.val, o.val, self.val)
    }
}

impl<'t, T: TapeValue> Div for Var<'t, T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let q = self.val / o.val;
        let inv = T::constant(1.0) / o.val;
        self.binary(o, q, inv, -(q * inv))
    }
}

impl<'t, T: TapeValue> Neg for Var<'t, T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.unary(-self.val, T::constant(-1.0))
    }
}

impl<'t, T: TapeValue> Add<f64> for Var<'t, T> {
    type Output = Self;
    #[inline]
    fn add(self, c: f64) -> Self {
        self.unary(self.val + c, T::constant(1.0))
    }
}

impl<'t, T: TapeValue> Sub<f64> for Var<'t, T> {
    type Output = Self;
    #[inline]
    fn sub(self, c: f64) -> Self {
        self.unary(self.val - c, T::constant(1.0))
    }
}

impl<'t, T: TapeValue> Mul<f64> for Var<'t, T> {
    type Output = Self;
    #[inline]
    fn mul(self, c: f64) -> Self {
        self.unary(self.val * c, T::constant(c))
    }
}

impl<'t, T: TapeValue> Div<f64> for Var<'t, T> {
    type Output = Self;
    #[inline]
    fn div(self, c: f64) -> Self {
        self.unary(self.val / c, T::constant(1.0 / c))
    }
}

impl<'t, T: TapeValue> Scalar for Var<'t, T> {
    #[inline]
    fn constant(c: f64) -> Self {
        Var {
            tape: None,
            idx: NONE,
            val: T::constant(c),
        }
    }

    #[inline]
    fn value(&self) -> f64 {
        self.val.value()
    }

    #[inline]
    fn exp(self) -> Self {
        let e = self.val.exp();
        self.unary(e, e)
    }

    #[inline]
    fn ln(self) -> Self {
        self.unary(self.val.ln(), T::constant(1.0) / self.val)
    }

    #[inline]
    fn sqrt(self) -> Self {
        let s = self.val.sqrt();
        self.unary(s, T::constant(0.5) / s)
    }

    #[inline]
    fn powf(self, p: f64) -> Self {
        self.unary(self.val.powf(p), self.val.powf(p - 1.0) * p)
    }

    #[inline]
    fn pos(self) -> Self {
        if self.val.value() > 0.0 {
            self.unary(self.val, T::constant(1.0))
        } else {
            self.unary(T::default(), T::default())
        }
    }

    #[inline]
    fn norm_cdf(self) -> Self {
        self.unary(self.val.norm_cdf(), self.val.norm_pdf())
    }

    #[inline]
    fn norm_pdf(self) -> Self {
        let p = self.val.norm_pdf();
        self.unary(p, -(self.val * p))
    }

    #[inline]
    fn norm_inv(self) -> Self {
        let q = self.val.norm_inv();
        self.unary(q, T::constant(1.0) / q.norm_pdf())
    }

    fn bvn_cdf(a: Self, b: Self, rho: f64) -> Self {
        let (da, db) = bvn_partials(a.val, b.val, rho);
        a.binary(b, T::bvn_cdf(a.val, b.val, rho), da, db)
    }
}
