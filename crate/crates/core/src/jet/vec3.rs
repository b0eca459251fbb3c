use super::{Jet1, Scalar};
use crate::error::{Error, Result};

/// A vector in R³ whose components are jets of a common order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec3Jet<T: Scalar = f64> {
    c: [Jet1<T>; 3],
}

impl<T: Scalar> Vec3Jet<T> {
    pub fn new(c: [Jet1<T>; 3]) -> Result<Self> {
        let o = c[0].order();
        for comp in &c[1..] {
            if comp.order() != o {
                return Err(Error::OrderMismatch { left: o, right: comp.order() });
            }
        }
        Ok(Self { c })
    }

    pub fn constant(v: [T; 3], order: usize) -> Self {
        Self { c: v.map(|x| Jet1::constant(x, order)) }
    }

    pub fn order(&self) -> usize {
        self.c[0].order()
    }

    pub fn components(&self) -> &[Jet1<T>; 3] {
        &self.c
    }

    /// The k-th derivative of the vector, as plain coordinates.
    pub fn at(&self, k: usize) -> [T; 3] {
        [self.c[0].d(k), self.c[1].d(k), self.c[2].d(k)]
    }

    pub fn derivative(&self) -> Result<Self> {
        Ok(Self {
            c: [self.c[0].derivative()?, self.c[1].derivative()?, self.c[2].derivative()?],
        })
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self { c: self.c.map(|j| j.truncate(order)) }
    }

    pub fn scale_jet(&self, s: &Jet1<T>) -> Self {
        Self { c: self.c.map(|j| j * *s) }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { c: [self.c[0] + o.c[0], self.c[1] + o.c[1], self.c[2] + o.c[2]] }
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.order() != o.order() {
            return Err(Error::OrderMismatch { left: self.order(), right: o.order() });
        }
        Ok(())
    }

    pub fn dot(&self, o: &Self) -> Result<Jet1<T>> {
        self.check(o)?;
        Ok(self.c[0] * o.c[0] + self.c[1] * o.c[1] + self.c[2] * o.c[2])
    }

    pub fn cross(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let [a1, a2, a3] = self.c;
        let [b1, b2, b3] = o.c;
        Ok(Self { c: [a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1] })
    }

    /// Applies a constant 3×3 matrix to the vector.
    pub fn transform(&self, m: &[[T; 3]; 3]) -> Self {
        let row = |r: &[T; 3]| {
            self.c[0].scale(r[0]) + self.c[1].scale(r[1]) + self.c[2].scale(r[2])
        };
        Self { c: [row(&m[0]), row(&m[1]), row(&m[2])] }
    }

    pub fn re(&self) -> Vec3Jet<f64> {
        Vec3Jet { c: self.c.map(|j| j.re()) }
    }
}

/// Jet of `det(c1, c2, c3)` with the arguments as columns.
pub fn det3<T: Scalar>(c1: &Vec3Jet<T>, c2: &Vec3Jet<T>, c3: &Vec3Jet<T>) -> Result<Jet1<T>> {
    c1.dot(&c2.cross(c3)?)
}

pub fn cross<T: Scalar>(u: &Vec3Jet<T>, v: &Vec3Jet<T>) -> Result<Vec3Jet<T>> {
    u.cross(v)
}
