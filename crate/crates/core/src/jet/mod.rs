//! Truncated Taylor jets and the small amount of linear algebra done on them.
//!
//! Every derivative in the crate flows through these types; nothing is
//! finite-differenced. Univariate jets go up to order [`MAX_ORDER`], bivariate
//! jets up to [`MAX_ORDER2`] in each variable.

mod jet1;
mod jet2;
mod scalar;
mod vec3;

pub use jet1::Jet1;
pub use jet2::Jet2;
pub use scalar::{Dual, Scalar};
pub use vec3::{cross, det3, Vec3Jet};

/// Highest univariate derivative stored. Order 6 is what the affine lift
/// needs to reach `Γ''''`: the Wronskian already consumes two derivatives.
pub const MAX_ORDER: usize = 6;

/// Highest derivative per variable in a [`Jet2`].
pub const MAX_ORDER2: usize = 3;

/// Binary operation selector for the strict `arith` entry points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
    Div,
}

const BINOMIAL: [[f64; MAX_ORDER + 1]; MAX_ORDER + 1] = {
    let mut t = [[0.0; MAX_ORDER + 1]; MAX_ORDER + 1];
    let mut n = 0;
    while n <= MAX_ORDER {
        t[n][0] = 1.0;
        let mut k = 1;
        while k <= n {
            t[n][k] = t[n - 1][k - 1] + if k < n { t[n - 1][k] } else { 0.0 };
            k += 1;
        }
        n += 1;
    }
    t
};

#[inline]
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    BINOMIAL[n][k]
}
