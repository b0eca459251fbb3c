//! Projective duality and the third-order operator attached to a lift.
//!
//! Every unimodular lift satisfies `Γ‴ + qΓ′ + rΓ = 0`. The coefficients are
//! found by solving that overdetermined system in the least-squares sense, in
//! jet arithmetic, so their x-derivatives come for free.

use serde::Serialize;

use crate::curves::PlaneCurve;
use crate::error::{Error, Result};
use crate::jet::{det3, Jet1, Scalar, Vec3Jet};

/// Least-squares residual above which the operator system is inconsistent.
pub const INCONSISTENT_RESIDUAL: f64 = 1e-6;

/// `Γ* = Γ × Γ′`, one order below the input frame.
pub fn dual_frame<T: Scalar>(frame: &Vec3Jet<T>) -> Result<Vec3Jet<T>> {
    if frame.order() == 0 {
        return Err(Error::InsufficientOrder { needed: 1, available: 0 });
    }
    let d1 = frame.derivative()?;
    frame.truncate(d1.order()).cross(&d1)
}

/// `(q, r)` at a point, plus the determinant values kept for comparison with
/// the shortcut formulas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OperatorCoeffs {
    pub x: f64,
    pub q: f64,
    pub r: f64,
    /// Max-norm of `Γ‴ + qΓ′ + rΓ` at the solution.
    pub residual: f64,
    /// `det(Γ, Γ″, Γ‴)`; equals `+q` under the circle-anchored convention.
    pub det_g_g2_g3: f64,
    /// `det(Γ′, Γ″, Γ‴)`.
    pub det_g1_g2_g3: f64,
}

impl OperatorCoeffs {
    /// `k` with `Γ‴ = kΓ′ + vΓ`.
    pub fn k(&self) -> f64 {
        -self.q
    }

    pub fn v(&self) -> f64 {
        -self.r
    }
}

/// Jets of `q` and `r` (order `k − 3` for a frame of order `k`) and the value
/// residual.
pub fn operator_jets<T: Scalar>(frame: &Vec3Jet<T>) -> Result<(Jet1<T>, Jet1<T>, f64)> {
    if frame.order() < 3 {
        return Err(Error::InsufficientOrder { needed: 3, available: frame.order() });
    }
    let d1 = frame.derivative()?;
    let d3 = d1.derivative()?.derivative()?;
    let n = d3.order();
    let g = frame.truncate(n);
    let g1 = d1.truncate(n);

    // normal equations [a·a a·b; a·b b·b] (q, r) = −(a·c, b·c), a = Γ′, b = Γ, c = Γ‴
    let aa = g1.dot(&g1)?;
    let ab = g1.dot(&g)?;
    let bb = g.dot(&g)?;
    let ac = g1.dot(&d3)?;
    let bc = g.dot(&d3)?;
    let det = aa * bb - ab * ab;
    if det.value().re().abs() < 1e-300 {
        return Err(Error::DegenerateFrame { x: f64::NAN, det: det.value().re() });
    }
    let q = -(ac * bb - bc * ab).checked_div(&det)?;
    let r = -(aa * bc - ab * ac).checked_div(&det)?;

    let (q0, r0) = (q.value(), r.value());
    let c = d3.at(0);
    let a = g1.at(0);
    let b = g.at(0);
    let residual = (0..3)
        .map(|i| (c[i] + q0 * a[i] + r0 * b[i]).re().abs())
        .fold(0.0, f64::max);
    Ok((q, r, residual))
}

/// Operator coefficients of an arbitrary frame (order ≥ 3) based at `x`.
pub fn coeffs_of_frame(frame: &Vec3Jet, x: f64) -> Result<OperatorCoeffs> {
    let (q, r, residual) = operator_jets(&frame.truncate(3))?;
    if residual > INCONSISTENT_RESIDUAL {
        return Err(Error::Numerical(format!(
            "operator system inconsistent at x = {x}: residual {residual:e}"
        )));
    }
    let d1 = frame.derivative()?;
    let d2 = d1.derivative()?;
    let d3 = d2.derivative()?;
    let at = |v: &Vec3Jet| Vec3Jet::constant(v.at(0), 0);
    let (g0, g1, g2, g3) = (at(frame), at(&d1), at(&d2), at(&d3));
    Ok(OperatorCoeffs {
        x,
        q: q.value(),
        r: r.value(),
        residual,
        det_g_g2_g3: det3(&g0, &g2, &g3)?.value(),
        det_g1_g2_g3: det3(&g1, &g2, &g3)?.value(),
    })
}

pub fn operator_coeffs(curve: &PlaneCurve, x: f64) -> Result<OperatorCoeffs> {
    let frame = curve.lift_frame(x, 3)?;
    coeffs_of_frame(&frame.frame, x)
}

/// `h = v − k′/2 = −r + q′/2`.
pub fn length_density(curve: &PlaneCurve, x: f64) -> Result<f64> {
    let frame = curve.lift_frame(x, 4)?;
    let (q, r, residual) = operator_jets(&frame.frame)?;
    if residual > INCONSISTENT_RESIDUAL {
        return Err(Error::Numerical(format!(
            "operator system inconsistent at x = {x}: residual {residual:e}"
        )));
    }
    Ok(-r.value() + 0.5 * q.d(1))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConicTest {
    pub is_conic: bool,
    pub sup_h: f64,
    pub argmax: f64,
}

/// Uniform sample points: one period without the endpoint, or the closed
/// power-curve domain.
pub fn sample_points(curve: &PlaneCurve, n: usize) -> Vec<f64> {
    let (lo, hi) = curve.domain();
    match curve.period() {
        Some(t) => (0..n).map(|i| lo + t * i as f64 / n as f64).collect(),
        None => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// `sup |h|` over `grid_n` points; a conic iff it does not exceed `tol`.
pub fn conic_test(curve: &PlaneCurve, grid_n: usize, tol: f64) -> Result<ConicTest> {
    if grid_n < 8 {
        return Err(Error::Constraint(format!("grid must have at least 8 points, got {grid_n}")));
    }
    let mut sup_h = 0.0;
    let mut argmax = f64::NAN;
    for x in sample_points(curve, grid_n) {
        let h = length_density(curve, x)?.abs();
        if h > sup_h || argmax.is_nan() {
            sup_h = h;
            argmax = x;
        }
    }
    Ok(ConicTest { is_conic: sup_h <= tol, sup_h, argmax })
}
