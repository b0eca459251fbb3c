use std::ops::{Add, Mul, Neg, Sub};

use super::{binomial, Jet1, JetOp, MAX_ORDER2};
use crate::error::{Error, Result};

const CAP: usize = MAX_ORDER2 + 1;

/// Truncated bivariate jet: entry `(i, j)` is `∂ˣⁱ∂ʸʲ` of the function at
/// the base point, for `i ≤ mx`, `j ≤ my`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    mx: usize,
    my: usize,
    d: [[f64; CAP]; CAP],
}

impl Jet2 {
    pub fn zeros(mx: usize, my: usize) -> Result<Self> {
        let worst = mx.max(my);
        if worst > MAX_ORDER2 {
            return Err(Error::OrderTooLarge { requested: worst, max: MAX_ORDER2 });
        }
        Ok(Self { mx, my, d: [[0.0; CAP]; CAP] })
    }

    /// Builds from a row-major grid `grid[i][j] = ∂ˣⁱ∂ʸʲ`.
    pub fn from_grid(grid: &[Vec<f64>]) -> Result<Self> {
        let mx = grid.len().checked_sub(1).ok_or(Error::InsufficientOrder {
            needed: 0,
            available: 0,
        })?;
        let my = grid[0].len().checked_sub(1).ok_or(Error::InsufficientOrder {
            needed: 0,
            available: 0,
        })?;
        let mut j = Self::zeros(mx, my)?;
        for (i, row) in grid.iter().enumerate() {
            if row.len() != my + 1 {
                return Err(Error::OrderMismatch { left: my + 1, right: row.len() });
            }
            j.d[i][..=my].copy_from_slice(row);
        }
        Ok(j)
    }

    pub fn constant(value: f64, mx: usize, my: usize) -> Result<Self> {
        let mut j = Self::zeros(mx, my)?;
        j.d[0][0] = value;
        Ok(j)
    }

    /// Jet of `u(x)·v(y)`.
    pub fn outer(u: &Jet1, v: &Jet1) -> Result<Self> {
        let mut j = Self::zeros(u.order(), v.order())?;
        for i in 0..=u.order() {
            for k in 0..=v.order() {
                j.d[i][k] = u.d(i) * v.d(k);
            }
        }
        Ok(j)
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.mx, self.my)
    }

    pub fn value(&self) -> f64 {
        self.d[0][0]
    }

    /// Mixed partial `∂ˣⁱ∂ʸʲ`. Panics outside the stored orders.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i <= self.mx && j <= self.my, "partial ({i},{j}) beyond orders ({},{})", self.mx, self.my);
        self.d[i][j]
    }

    pub fn try_get(&self, i: usize, j: usize) -> Result<f64> {
        if i > self.mx || j > self.my {
            return Err(Error::InsufficientOrder {
                needed: i.max(j),
                available: if i > self.mx { self.mx } else { self.my },
            });
        }
        Ok(self.d[i][j])
    }

    /// Requires at least orders `(mx, my)`.
    pub fn require(&self, mx: usize, my: usize) -> Result<()> {
        if self.mx < mx {
            return Err(Error::InsufficientOrder { needed: mx, available: self.mx });
        }
        if self.my < my {
            return Err(Error::InsufficientOrder { needed: my, available: self.my });
        }
        Ok(())
    }

    pub fn truncate(&self, mx: usize, my: usize) -> Self {
        assert!(mx <= self.mx && my <= self.my, "cannot raise jet orders");
        let mut j = Self { mx, my, d: [[0.0; CAP]; CAP] };
        for i in 0..=mx {
            j.d[i][..=my].copy_from_slice(&self.d[i][..=my]);
        }
        j
    }

    pub fn dx(&self) -> Result<Self> {
        if self.mx == 0 {
            return Err(Error::InsufficientOrder { needed: 1, available: 0 });
        }
        let mut j = Self::zeros(self.mx - 1, self.my)?;
        for i in 0..self.mx {
            j.d[i][..=self.my].copy_from_slice(&self.d[i + 1][..=self.my]);
        }
        Ok(j)
    }

    pub fn dy(&self) -> Result<Self> {
        if self.my == 0 {
            return Err(Error::InsufficientOrder { needed: 1, available: 0 });
        }
        let mut j = Self::zeros(self.mx, self.my - 1)?;
        for i in 0..=self.mx {
            j.d[i][..self.my].copy_from_slice(&self.d[i][1..=self.my]);
        }
        Ok(j)
    }

    /// Jet of `(x, y) ↦ F(y, x)` at the swapped base point.
    pub fn transpose(&self) -> Self {
        let mut j = Self { mx: self.my, my: self.mx, d: [[0.0; CAP]; CAP] };
        for i in 0..=self.mx {
            for k in 0..=self.my {
                j.d[k][i] = self.d[i][k];
            }
        }
        j
    }

    /// Restriction to the line `y = y₀` as a jet in x.
    pub fn x_slice(&self, j: usize) -> Jet1 {
        let col: Vec<f64> = (0..=self.mx).map(|i| self.d[i][j]).collect();
        Jet1::new(&col).expect("jet2 orders fit a jet1")
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut j = *self;
        for row in &mut j.d {
            for v in row.iter_mut() {
                *v *= k;
            }
        }
        j
    }

    fn common(&self, o: &Self) -> (usize, usize) {
        (self.mx.min(o.mx), self.my.min(o.my))
    }

    pub fn checked_div(&self, o: &Self) -> Result<Self> {
        let b0 = o.d[0][0];
        if b0 == 0.0 {
            return Err(Error::SingularJet { value: b0 });
        }
        let (mx, my) = self.common(o);
        let mut q = Self::zeros(mx, my)?;
        for i in 0..=mx {
            for j in 0..=my {
                let mut acc = self.d[i][j];
                for k in 0..=i {
                    for l in 0..=j {
                        if k == 0 && l == 0 {
                            continue;
                        }
                        acc -= binomial(i, k) * binomial(j, l) * o.d[k][l] * q.d[i - k][j - l];
                    }
                }
                q.d[i][j] = acc / b0;
            }
        }
        Ok(q)
    }

    pub fn arith(&self, op: JetOp, o: &Self) -> Result<Self> {
        if self.orders() != o.orders() {
            let (l, r) = if self.mx != o.mx { (self.mx, o.mx) } else { (self.my, o.my) };
            return Err(Error::OrderMismatch { left: l, right: r });
        }
        match op {
            JetOp::Add => Ok(*self + *o),
            JetOp::Sub => Ok(*self - *o),
            JetOp::Mul => Ok(*self * *o),
            JetOp::Div => self.checked_div(o),
        }
    }

    /// Largest absolute difference over the common slots.
    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        let (mx, my) = self.common(o);
        let mut m: f64 = 0.0;
        for i in 0..=mx {
            for j in 0..=my {
                m = m.max((self.d[i][j] - o.d[i][j]).abs());
            }
        }
        m
    }
}

impl Add for Jet2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (mx, my) = self.common(&o);
        let mut j = self.truncate(mx, my);
        for i in 0..=mx {
            for k in 0..=my {
                j.d[i][k] += o.d[i][k];
            }
        }
        j
    }
}

impl Sub for Jet2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for Jet2 {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (mx, my) = self.common(&o);
        let mut out = Self { mx, my, d: [[0.0; CAP]; CAP] };
        for i in 0..=mx {
            for j in 0..=my {
                let mut acc = 0.0;
                for k in 0..=i {
                    for l in 0..=j {
                        acc += binomial(i, k) * binomial(j, l) * self.d[k][l] * o.d[i - k][j - l];
                    }
                }
                out.d[i][j] = acc;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Jet of x·y at (a, b).
    fn xy(a: f64, b: f64) -> Jet2 {
        Jet2::outer(&Jet1::variable(a, 3), &Jet1::variable(b, 3)).unwrap()
    }

    #[test]
    fn outer_product_partials() {
        let j = xy(2.0, 5.0);
        assert_eq!(j.get(0, 0), 10.0);
        assert_eq!(j.get(1, 0), 5.0);
        assert_eq!(j.get(0, 1), 2.0);
        assert_eq!(j.get(1, 1), 1.0);
        assert_eq!(j.get(2, 1), 0.0);
    }

    #[test]
    fn product_rule_in_two_variables() {
        // (xy)² = x²y², ∂x²∂y² = 4
        let j = xy(2.0, 5.0);
        let sq = j * j;
        assert_abs_diff_eq!(sq.get(0, 0), 100.0);
        assert_abs_diff_eq!(sq.get(2, 2), 4.0);
        assert_abs_diff_eq!(sq.get(1, 2), 4.0 * 2.0);
        assert_abs_diff_eq!(sq.get(3, 3), 0.0);
    }

    #[test]
    fn division_inverts_multiplication() {
        let a = xy(1.5, 0.5) + Jet2::constant(2.0, 3, 3).unwrap();
        let b = Jet2::outer(&Jet1::variable(0.3, 3).exp(), &Jet1::variable(0.2, 3).cos()).unwrap();
        let q = (a * b).checked_div(&b).unwrap();
        assert!(q.max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn transpose_swaps_partials() {
        let j = Jet2::outer(&Jet1::variable(0.3, 3).sin(), &Jet1::variable(0.7, 2).exp()).unwrap();
        let t = j.transpose();
        assert_eq!(t.orders(), (2, 3));
        assert_eq!(t.get(2, 1), j.get(1, 2));
    }

    #[test]
    fn shifts_and_order_checks() {
        let j = xy(2.0, 3.0);
        assert_eq!(j.dx().unwrap().get(0, 1), 1.0);
        assert_eq!(j.dy().unwrap().orders(), (3, 2));
        assert!(Jet2::zeros(4, 1).is_err());
        assert!(j.truncate(1, 1).dx().unwrap().dx().is_err());
        assert!(matches!(
            j.arith(JetOp::Add, &j.truncate(2, 3)),
            Err(Error::OrderMismatch { .. })
        ));
    }
}
