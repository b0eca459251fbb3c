use std::ops::{Add, Mul, Neg, Sub};

use super::scalar::{Dual, Scalar};
use super::{binomial, JetOp, MAX_ORDER};
use crate::error::{Error, Result};

const CAP: usize = MAX_ORDER + 1;

/// Truncated univariate jet.
///
/// Slot `k` stores the k-th derivative value at the base point (not the
/// Taylor coefficient), so `d(2)` of `x²` is `2`. Binary operators truncate
/// to the smaller of the two orders; [`Jet1::arith`] is the strict variant
/// that rejects mismatched orders.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet1<T: Scalar = f64> {
    order: usize,
    d: [T; CAP],
}

impl<T: Scalar> Jet1<T> {
    /// Builds a jet from derivative values `d⁰..dᵏ`.
    pub fn new(derivs: &[T]) -> Result<Self> {
        if derivs.is_empty() {
            return Err(Error::InsufficientOrder { needed: 0, available: 0 });
        }
        let order = derivs.len() - 1;
        if order > MAX_ORDER {
            return Err(Error::OrderTooLarge { requested: order, max: MAX_ORDER });
        }
        let mut d = [T::zero(); CAP];
        d[..derivs.len()].copy_from_slice(derivs);
        Ok(Self { order, d })
    }

    fn zeros(order: usize) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        Self { order, d: [T::zero(); CAP] }
    }

    pub fn constant(value: T, order: usize) -> Self {
        let mut j = Self::zeros(order);
        j.d[0] = value;
        j
    }

    /// Jet of the identity function at `x`.
    pub fn variable(x: T, order: usize) -> Self {
        let mut j = Self::constant(x, order);
        if order >= 1 {
            j.d[1] = T::one();
        }
        j
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> T {
        self.d[0]
    }

    /// k-th derivative value. Panics if `k > order`.
    pub fn d(&self, k: usize) -> T {
        assert!(k <= self.order, "derivative {k} beyond jet order {}", self.order);
        self.d[k]
    }

    pub fn derivs(&self) -> &[T] {
        &self.d[..=self.order]
    }

    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order, "cannot raise order {} to {order}", self.order);
        let mut j = *self;
        j.order = order;
        for v in &mut j.d[order + 1..] {
            *v = T::zero();
        }
        j
    }

    /// Jet of the derivative, one order lower.
    pub fn derivative(&self) -> Result<Self> {
        if self.order == 0 {
            return Err(Error::InsufficientOrder { needed: 1, available: 0 });
        }
        let mut j = Self::zeros(self.order - 1);
        j.d[..self.order].copy_from_slice(&self.d[1..=self.order]);
        Ok(j)
    }

    /// Antiderivative taking value `c` at the base point, one order higher.
    pub fn integrate(&self, c: T) -> Result<Self> {
        if self.order + 1 > MAX_ORDER {
            return Err(Error::OrderTooLarge { requested: self.order + 1, max: MAX_ORDER });
        }
        let mut j = Self::zeros(self.order + 1);
        j.d[0] = c;
        j.d[1..=self.order + 1].copy_from_slice(&self.d[..=self.order]);
        Ok(j)
    }

    pub fn scale(&self, k: T) -> Self {
        let mut j = *self;
        for v in &mut j.d[..=self.order] {
            *v = *v * k;
        }
        j
    }

    fn common(&self, other: &Self) -> usize {
        self.order.min(other.order)
    }

    fn leibniz(&self, other: &Self) -> Self {
        let n = self.common(other);
        let mut out = Self::zeros(n);
        for k in 0..=n {
            let mut acc = T::zero();
            for i in 0..=k {
                acc += (self.d[i] * other.d[k - i]).scale(binomial(k, i));
            }
            out.d[k] = acc;
        }
        out
    }

    /// Quotient by a jet with non-zero value.
    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        let b0 = other.d[0];
        if b0.re() == 0.0 {
            return Err(Error::SingularJet { value: b0.re() });
        }
        let n = self.common(other);
        let mut q = Self::zeros(n);
        // a = q·b, solved slot by slot
        for k in 0..=n {
            let mut acc = self.d[k];
            for i in 1..=k {
                acc = acc - (other.d[i] * q.d[k - i]).scale(binomial(k, i));
            }
            q.d[k] = acc / b0;
        }
        Ok(q)
    }

    pub fn recip(&self) -> Result<Self> {
        Self::constant(T::one(), self.order).checked_div(self)
    }

    pub fn exp(&self) -> Self {
        let mut e = Self::zeros(self.order);
        e.d[0] = self.d[0].exp();
        // e' = a'·e
        for k in 0..self.order {
            let mut acc = T::zero();
            for i in 0..=k {
                acc += (self.d[i + 1] * e.d[k - i]).scale(binomial(k, i));
            }
            e.d[k + 1] = acc;
        }
        e
    }

    /// Natural logarithm; the value must be positive.
    pub fn ln(&self) -> Result<Self> {
        if self.d[0].re() <= 0.0 {
            return Err(Error::NonPositive { value: self.d[0].re() });
        }
        if self.order == 0 {
            return Ok(Self::constant(self.d[0].ln(), 0));
        }
        let ratio = self.derivative()?.checked_div(&self.truncate(self.order - 1))?;
        ratio.integrate(self.d[0].ln())
    }

    /// `sin` and `cos` of the jet, computed together.
    pub fn sin_cos(&self) -> (Self, Self) {
        let mut s = Self::zeros(self.order);
        let mut c = Self::zeros(self.order);
        s.d[0] = self.d[0].sin();
        c.d[0] = self.d[0].cos();
        for k in 0..self.order {
            let mut ds = T::zero();
            let mut dc = T::zero();
            for i in 0..=k {
                let b = binomial(k, i);
                ds += (self.d[i + 1] * c.d[k - i]).scale(b);
                dc += (self.d[i + 1] * s.d[k - i]).scale(-b);
            }
            s.d[k + 1] = ds;
            c.d[k + 1] = dc;
        }
        (s, c)
    }

    pub fn sin(&self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Self {
        self.sin_cos().1
    }

    /// Real power `a^p = exp(p·ln a)`; requires a positive value.
    pub fn powf(&self, p: f64) -> Result<Self> {
        Ok(self.ln()?.scale(T::from_f64(p)).exp())
    }

    pub fn sqrt(&self) -> Result<Self> {
        self.powf(0.5)
    }

    /// Strict arithmetic: orders must match.
    pub fn arith(&self, op: JetOp, other: &Self) -> Result<Self> {
        if self.order != other.order {
            return Err(Error::OrderMismatch { left: self.order, right: other.order });
        }
        match op {
            JetOp::Add => Ok(*self + *other),
            JetOp::Sub => Ok(*self - *other),
            JetOp::Mul => Ok(*self * *other),
            JetOp::Div => self.checked_div(other),
        }
    }

    /// Drops every auxiliary derivative carried by the scalar type.
    pub fn re(&self) -> Jet1<f64> {
        let mut j = Jet1::<f64>::zeros(self.order);
        for k in 0..=self.order {
            j.d[k] = self.d[k].re();
        }
        j
    }
}

impl Jet1<f64> {
    /// Lifts a plain jet into dual coefficients: `base + s·tangent`.
    pub fn with_tangent(&self, tangent: &Jet1<f64>) -> Jet1<Dual> {
        let n = self.order.min(tangent.order);
        let mut j = Jet1::<Dual>::zeros(n);
        for k in 0..=n {
            j.d[k] = Dual::new(self.d[k], tangent.d[k]);
        }
        j
    }
}

impl Jet1<Dual> {
    /// The s-derivative part of every slot.
    pub fn tangent(&self) -> Jet1<f64> {
        let mut j = Jet1::<f64>::zeros(self.order);
        for k in 0..=self.order {
            j.d[k] = self.d[k].du;
        }
        j
    }
}

impl<T: Scalar> Add for Jet1<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let n = self.common(&o);
        let mut j = Self::zeros(n);
        for k in 0..=n {
            j.d[k] = self.d[k] + o.d[k];
        }
        j
    }
}

impl<T: Scalar> Sub for Jet1<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let n = self.common(&o);
        let mut j = Self::zeros(n);
        for k in 0..=n {
            j.d[k] = self.d[k] - o.d[k];
        }
        j
    }
}

impl<T: Scalar> Mul for Jet1<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        self.leibniz(&o)
    }
}

impl<T: Scalar> Neg for Jet1<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}
